#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "bsdelab/harness/expr.hpp"
#include "bsdelab/paths.hpp"
#include "json.hpp"

namespace bsdelab::harness {

using Json = nlohmann::json;

/// Typed view of one config object. Every accessor reports violations as
/// usage errors naming the field path, e.g. "scenario.grid.T".
class Node {
 public:
  Node(const Json& j, std::string path);

  const std::string& path() const { return path_; }
  const Json& raw() const { return j_; }
  bool has(const std::string& key) const;
  std::string at(const std::string& key) const { return path_ + "." + key; }

  /// Rejects keys outside `allowed`.
  void allow(std::initializer_list<const char*> allowed) const;

  Node child(const std::string& key) const;
  Node child_or_empty(const std::string& key) const;

  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  std::size_t count(const std::string& key) const;
  std::size_t count(const std::string& key, std::size_t fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::string text(const std::string& key) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  /// A string is compiled as an expression; a bare number becomes a constant.
  Expr expr(const std::string& key) const;
  Expr expr(const std::string& key, const std::string& fallback) const;
  /// A single expression or an array of them.
  std::vector<Expr> exprs(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const;
  std::vector<Node> objects(const std::string& key) const;

  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

 private:
  const Json& get(const std::string& key) const;
  Json j_;
  std::string path_;
};

struct Expectation {
  std::string output;
  /// within: |v - value| <= abs_tol + rel_tol |value| + n_se se
  /// le: v <= value + abs_tol + n_se se;  ge: v >= value - abs_tol - n_se se
  std::string op = "within";
  double value = 0.0;
  double abs_tol = 0.0;
  double rel_tol = 0.0;
  double n_se = 0.0;
};

struct Scenario {
  std::string id;
  std::string kind;
  std::string description;
  std::uint64_t seed = 0;
  Json config;  // fully merged
  std::vector<Expectation> expect;
};

inline constexpr const char* kScenarioKinds[] = {"linear",  "nonlinear-bsde",
                                                 "feynman-kac-parabolic",
                                                 "feynman-kac-elliptic", "utility", "study"};

/// Validates the common fields. A "catalog" key names a catalog entry used as
/// the base; the remaining keys are merged over it (JSON merge patch).
Scenario parse_scenario(const Json& config);

/// Reads and parses a config file; parse and I/O failures are usage errors.
Json load_config_file(const std::string& path);

/// FNV-1a 64 of the canonical dump, as 16 hex digits.
std::string config_digest(const Json& config);

/// Scalar field over (t, x) from an expression.
ScalarField scalar_field(const Expr& e);

}  // namespace bsdelab::harness
