#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace bsdelab::harness {

struct Output {
  std::string name;
  double value = 0.0;
  /// NaN when the output carries no standard error.
  double se = 0.0;
};

struct Check {
  std::string name;
  std::string status;  // pass, fail or uncertified
  std::string detail;
};

struct RunReport {
  std::string id;
  std::string kind;
  std::string digest;
  std::vector<Output> outputs;
  std::vector<Check> checks;
  std::vector<std::pair<std::string, std::string>> notes;
  std::vector<std::string> artifacts;
  /// Kept out of every emitted format so report bytes are reproducible.
  double wall_seconds = 0.0;

  void add(const std::string& name, double value);
  void add(const std::string& name, double value, double se);
  void note(const std::string& key, const std::string& text);
  const Output* find(const std::string& name) const;
  /// Value of an output, or throws when it is missing.
  double value(const std::string& name) const;
  bool failed() const;
  /// 0 when every check passed or is uncertified, 2 otherwise.
  int exit_code() const;
};

enum class ReportFormat { kText, kCsv, kJson };

ReportFormat parse_format(const std::string& name);

/// Deterministic bytes: fixed column order, floats with 10 significant digits.
void emit_report(const RunReport& report, ReportFormat format, std::ostream& out);

nlohmann::json report_to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);

/// "%.10g"; "nan" and "inf" spelled out.
std::string format_number(double v);

/// Writes `text` to `path`, raising an I/O error on failure.
void write_file(const std::string& path, const std::string& text);

}  // namespace bsdelab::harness
