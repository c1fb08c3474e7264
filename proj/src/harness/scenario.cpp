#include "bsdelab/harness/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "bsdelab/errors.hpp"
#include "bsdelab/harness/catalog.hpp"

namespace bsdelab::harness {

Node::Node(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
  if (!j_.is_object()) throw Error(ErrorKind::kUsage, path_ + ": expected an object");
}

bool Node::has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

void Node::fail(const std::string& key, const std::string& message) const {
  throw Error(ErrorKind::kUsage, at(key) + ": " + message);
}

const Json& Node::get(const std::string& key) const {
  if (!has(key)) fail(key, "required field is missing");
  return j_.at(key);
}

void Node::allow(std::initializer_list<const char*> allowed) const {
  for (auto it = j_.begin(); it != j_.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) fail(it.key(), "unknown field");
  }
}

Node Node::child(const std::string& key) const {
  const Json& v = get(key);
  if (!v.is_object()) fail(key, "expected an object");
  return Node(v, at(key));
}

Node Node::child_or_empty(const std::string& key) const {
  if (!has(key)) return Node(Json::object(), at(key));
  return child(key);
}

double Node::number(const std::string& key) const {
  const Json& v = get(key);
  if (!v.is_number()) fail(key, "expected a number");
  return v.get<double>();
}

double Node::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::size_t Node::count(const std::string& key) const {
  const Json& v = get(key);
  if (!v.is_number_integer() || v.get<long long>() <= 0) fail(key, "expected a positive integer");
  return static_cast<std::size_t>(v.get<long long>());
}

std::size_t Node::count(const std::string& key, std::size_t fallback) const {
  return has(key) ? count(key) : fallback;
}

bool Node::flag(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const Json& v = j_.at(key);
  if (!v.is_boolean()) fail(key, "expected true or false");
  return v.get<bool>();
}

std::string Node::text(const std::string& key) const {
  const Json& v = get(key);
  if (!v.is_string()) fail(key, "expected a string");
  return v.get<std::string>();
}

std::string Node::text(const std::string& key, const std::string& fallback) const {
  return has(key) ? text(key) : fallback;
}

namespace {

Expr compile_at(const Json& v, const std::string& path) {
  std::string src;
  if (v.is_number()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    src = buf;
  } else if (v.is_string()) {
    src = v.get<std::string>();
  } else {
    throw Error(ErrorKind::kUsage, path + ": expected an expression string or a number");
  }
  try {
    return Expr::compile(src);
  } catch (const Error& e) {
    throw Error(ErrorKind::kUsage, path + ": " + e.what());
  }
}

}  // namespace

Expr Node::expr(const std::string& key) const { return compile_at(get(key), at(key)); }

Expr Node::expr(const std::string& key, const std::string& fallback) const {
  return has(key) ? expr(key) : compile_at(Json(fallback), at(key));
}

std::vector<Expr> Node::exprs(const std::string& key) const {
  const Json& v = get(key);
  std::vector<Expr> out;
  if (v.is_array()) {
    if (v.empty()) fail(key, "expected at least one expression");
    for (std::size_t i = 0; i < v.size(); ++i)
      out.push_back(compile_at(v[i], at(key) + "[" + std::to_string(i) + "]"));
  } else {
    out.push_back(compile_at(v, at(key)));
  }
  return out;
}

std::vector<double> Node::numbers(const std::string& key) const {
  const Json& v = get(key);
  if (!v.is_array()) fail(key, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(key + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

std::vector<double> Node::numbers(const std::string& key, std::vector<double> fallback) const {
  return has(key) ? numbers(key) : fallback;
}

std::vector<Node> Node::objects(const std::string& key) const {
  const Json& v = get(key);
  if (!v.is_array()) fail(key, "expected an array of objects");
  std::vector<Node> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(v[i], at(key) + "[" + std::to_string(i) + "]");
  return out;
}

Scenario parse_scenario(const Json& input) {
  if (!input.is_object()) throw Error(ErrorKind::kUsage, "scenario: expected an object");
  Json config = input;
  if (config.contains("catalog")) {
    if (!config["catalog"].is_string())
      throw Error(ErrorKind::kUsage, "scenario.catalog: expected a catalog id");
    Json base = catalog_config(config["catalog"].get<std::string>());
    Json patch = config;
    patch.erase("catalog");
    base.merge_patch(patch);
    config = base;
  }
  const Node root(config, "scenario");
  Scenario s;
  s.id = root.text("id");
  s.kind = root.text("kind");
  bool known = false;
  for (const char* k : kScenarioKinds) known = known || s.kind == k;
  if (!known) root.fail("kind", "unknown kind '" + s.kind + "'");
  s.description = root.text("description", "");
  {
    const Json& seed = config.contains("seed") ? config["seed"] : Json();
    if (seed.is_null()) root.fail("seed", "required field is missing");
    if (!seed.is_number_integer() || seed.get<long long>() < 0)
      root.fail("seed", "expected a nonnegative integer");
    s.seed = seed.get<std::uint64_t>();
  }
  if (root.has("expect")) {
    for (const Node& e : root.objects("expect")) {
      e.allow({"output", "op", "value", "abs_tol", "rel_tol", "n_se"});
      Expectation x;
      x.output = e.text("output");
      x.op = e.text("op", "within");
      if (x.op != "within" && x.op != "le" && x.op != "ge") e.fail("op", "expected within, le or ge");
      x.value = e.number("value");
      x.abs_tol = e.number("abs_tol", 0.0);
      x.rel_tol = e.number("rel_tol", 0.0);
      x.n_se = e.number("n_se", 0.0);
      s.expect.push_back(x);
    }
  }
  s.config = config;
  return s;
}

Json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kUsage, "cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::kUsage, path + ": " + e.what());
  }
}

std::string config_digest(const Json& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ScalarField scalar_field(const Expr& e) {
  return [e](double t, std::span<const double> x) {
    ExprVars v;
    v.t = t;
    v.x = x;
    return e(v);
  };
}

}  // namespace bsdelab::harness
