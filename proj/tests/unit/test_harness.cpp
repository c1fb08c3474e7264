#include <cmath>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bsdelab/errors.hpp"
#include "bsdelab/harness/catalog.hpp"
#include "bsdelab/harness/expr.hpp"
#include "bsdelab/harness/report.hpp"
#include "bsdelab/harness/runner.hpp"
#include "bsdelab/harness/scenario.hpp"
#include "doctest.h"

using namespace bsdelab;
using namespace bsdelab::harness;

namespace {

double eval(const std::string& src, double x = 0.0, double y = 0.0, double z = 0.0) {
  const double xs[] = {x}, ys[] = {y}, zs[] = {z};
  ExprVars v;
  v.x = xs;
  v.y = ys;
  v.z = zs;
  return Expr::compile(src)(v);
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kConfiguration;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

RunReport sample_report() {
  RunReport r;
  r.id = "sample";
  r.kind = "linear";
  r.digest = "0123456789abcdef";
  r.add("y0", 0.1234567890123, 0.001);
  r.add("count", 3.0);
  r.checks.push_back({"y0", "pass", "|d| = 0.001"});
  r.checks.push_back({"norm, weighted", "fail", "quote \"here\""});
  r.note("solver", "picard");
  r.wall_seconds = 12.5;
  return r;
}

}  // namespace

TEST_SUITE("cli-harness") {

TEST_CASE("expression arithmetic and functions") {
  CHECK(eval("1 + 2 * 3") == 7.0);
  CHECK(eval("2 ^ 3 ^ 2") == 512.0);
  CHECK(eval("-2 ^ 2") == -4.0);
  CHECK(eval("abs(x) + |y|", -1.5, -2.0) == 3.5);
  CHECK(eval("min(x, y) + max(x, y)", 1.0, 4.0) == 5.0);
  CHECK(eval("clip(x, -1, 1)", 3.0) == 1.0);
  CHECK(eval("ind(x)", 0.0) == 0.0);
  CHECK(eval("ind(x)", 0.1) == 1.0);
  CHECK(eval("x < y", 1.0, 2.0) == 1.0);
  CHECK(eval("exp(log(x))", 2.5) == doctest::Approx(2.5));
  CHECK(eval("sin(pi / 2) + cosh(0)") == doctest::Approx(2.0));
  CHECK(eval("z^2 + zn", 0.0, 0.0, -3.0) == 12.0);
  CHECK(Expr::compile("x2 + x").max_x_index() == 2);
}

TEST_CASE("expression errors are usage errors") {
  for (const char* bad : {"x +", "foo(x)", "w + 1", "(x", "1 2", "min(x)"})
    CHECK(kind_of([&] { Expr::compile(bad); }) == ErrorKind::kUsage);
  CHECK(message_of([] { Expr::compile("x + )"); }).find("offset") != std::string::npos);
}

TEST_CASE("parse_scenario validates required fields") {
  Json ok = {{"id", "a"}, {"kind", "linear"}, {"seed", 7}};
  const Scenario s = parse_scenario(ok);
  CHECK(s.seed == 7);
  CHECK(s.kind == "linear");

  Json no_seed = ok;
  no_seed.erase("seed");
  CHECK(kind_of([&] { parse_scenario(no_seed); }) == ErrorKind::kUsage);
  CHECK(message_of([&] { parse_scenario(no_seed); }).find("scenario.seed: required field is missing") !=
        std::string::npos);

  Json neg = ok;
  neg["seed"] = -1;
  CHECK(message_of([&] { parse_scenario(neg); }).find("nonnegative integer") != std::string::npos);

  Json bad_kind = ok;
  bad_kind["kind"] = "spline";
  CHECK(kind_of([&] { parse_scenario(bad_kind); }) == ErrorKind::kUsage);

  Json bad_expect = ok;
  bad_expect["expect"] = Json::array({{{"output", "y0"}, {"value", 1.0}, {"slack", 1}}});
  CHECK(message_of([&] { parse_scenario(bad_expect); }).find("scenario.expect[0]") != std::string::npos);

  CHECK(kind_of([] { parse_scenario(Json::array()); }) == ErrorKind::kUsage);
}

TEST_CASE("catalog merge applies overrides over the base entry") {
  const Json patch = {{"catalog", "pure-decay"}, {"seed", 99}};
  const Scenario s = parse_scenario(patch);
  CHECK(s.id == "pure-decay");
  CHECK(s.seed == 99);
  CHECK(s.config["kind"] == "study");
  CHECK_FALSE(s.config.contains("catalog"));
  CHECK(kind_of([] { parse_scenario(Json{{"catalog", "no-such-entry"}}); }) == ErrorKind::kUsage);
}

TEST_CASE("every catalog entry parses and ids are unique") {
  std::set<std::string> ids;
  for (const CatalogEntry& e : catalog()) {
    CAPTURE(e.id);
    const Scenario s = parse_scenario(catalog_config(e.id));
    CHECK(s.id == e.id);
    CHECK(ids.insert(e.id).second);
  }
  CHECK(ids.size() == catalog().size());
}

TEST_CASE("config digest is stable and key-order independent") {
  const Json a = Json::parse(R"({"b": 1, "a": [1, 2]})");
  const Json b = Json::parse(R"({"a": [1, 2], "b": 1})");
  CHECK(config_digest(a) == config_digest(b));
  CHECK(config_digest(a).size() == 16);
  CHECK(config_digest(a) != config_digest(Json::parse(R"({"a": [2, 1], "b": 1})")));
}

TEST_CASE("report formats are deterministic and round-trip") {
  const RunReport r = sample_report();
  for (ReportFormat f : {ReportFormat::kText, ReportFormat::kCsv, ReportFormat::kJson}) {
    std::ostringstream a, b;
    emit_report(r, f, a);
    RunReport later = r;
    later.wall_seconds = 99.0;
    emit_report(later, f, b);
    CHECK(a.str() == b.str());
  }
  std::ostringstream csv;
  emit_report(r, ReportFormat::kCsv, csv);
  CHECK(csv.str().find("check,\"norm, weighted\",,,fail,\"quote \"\"here\"\"\"\n") != std::string::npos);
  CHECK(csv.str().find("output,y0,0.123456789,0.001,,\n") != std::string::npos);

  const RunReport back = report_from_json(report_to_json(r));
  CHECK(back.outputs.size() == 2);
  CHECK(std::isnan(back.outputs[1].se));
  CHECK(back.checks[1].status == "fail");
  CHECK(back.exit_code() == 2);
}

TEST_CASE("empty report emits header-only CSV") {
  RunReport r;
  std::ostringstream os;
  emit_report(r, ReportFormat::kCsv, os);
  CHECK(os.str() == "section,name,value,se,status,detail\n");
  CHECK(r.exit_code() == 0);
}

TEST_CASE("format names and numbers") {
  CHECK(parse_format("table-text") == ReportFormat::kText);
  CHECK(parse_format("csv") == ReportFormat::kCsv);
  CHECK(parse_format("structured-records") == ReportFormat::kJson);
  CHECK(kind_of([] { parse_format("xml"); }) == ErrorKind::kUsage);
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(format_number(-INFINITY) == "-inf");
  CHECK(format_number(1.0 / 3.0) == "0.3333333333");
}

TEST_CASE("uncertified checks do not fail a run") {
  RunReport r;
  r.checks.push_back({"attainability", "uncertified", ""});
  CHECK(r.exit_code() == 0);
}

TEST_CASE("small pipeline run is reproducible") {
  const Json cfg = Json::parse(R"({
    "id": "tiny", "kind": "study", "seed": 3,
    "study": "divergence",
    "params": {"T_values": [1], "c": 1, "steps_per_unit": 32, "n_paths": 16}
  })");
  std::ostringstream a, b;
  emit_report(run_scenario(parse_scenario(cfg)), ReportFormat::kJson, a);
  emit_report(run_scenario(parse_scenario(cfg)), ReportFormat::kJson, b);
  CHECK(a.str() == b.str());
}

}  // TEST_SUITE
