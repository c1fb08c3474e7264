#include "bsdelab/harness/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>

#include "bsdelab/errors.hpp"

namespace bsdelab::harness {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

nlohmann::json number_json(double v) {
  if (!std::isfinite(v)) return format_number(v);
  return std::strtod(format_number(v).c_str(), nullptr);
}

double number_from(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return std::strtod(j.get<std::string>().c_str(), nullptr);
  return kNaN;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void RunReport::add(const std::string& name, double v) { outputs.push_back({name, v, kNaN}); }

void RunReport::add(const std::string& name, double v, double se) { outputs.push_back({name, v, se}); }

void RunReport::note(const std::string& key, const std::string& text) { notes.emplace_back(key, text); }

const Output* RunReport::find(const std::string& name) const {
  for (const Output& o : outputs)
    if (o.name == name) return &o;
  return nullptr;
}

double RunReport::value(const std::string& name) const {
  const Output* o = find(name);
  if (!o) throw Error(ErrorKind::kConfiguration, "report has no output '" + name + "'");
  return o->value;
}

bool RunReport::failed() const {
  for (const Check& c : checks)
    if (c.status == "fail") return true;
  return false;
}

int RunReport::exit_code() const { return failed() ? 2 : 0; }

ReportFormat parse_format(const std::string& name) {
  if (name == "table-text" || name == "text") return ReportFormat::kText;
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "structured-records" || name == "json") return ReportFormat::kJson;
  throw Error(ErrorKind::kUsage, "unknown report format '" + name + "' (table-text, csv, json)");
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

nlohmann::json report_to_json(const RunReport& r) {
  nlohmann::json j;
  j["id"] = r.id;
  j["kind"] = r.kind;
  j["digest"] = r.digest;
  j["outputs"] = nlohmann::json::array();
  for (const Output& o : r.outputs) {
    nlohmann::json row{{"name", o.name}, {"value", number_json(o.value)}};
    if (!std::isnan(o.se)) row["se"] = number_json(o.se);
    j["outputs"].push_back(row);
  }
  j["checks"] = nlohmann::json::array();
  for (const Check& c : r.checks)
    j["checks"].push_back({{"name", c.name}, {"status", c.status}, {"detail", c.detail}});
  j["notes"] = nlohmann::json::array();
  for (const auto& [k, v] : r.notes) j["notes"].push_back({{"key", k}, {"text", v}});
  j["artifacts"] = r.artifacts;
  return j;
}

RunReport report_from_json(const nlohmann::json& j) {
  RunReport r;
  try {
    r.id = j.at("id").get<std::string>();
    r.kind = j.at("kind").get<std::string>();
    r.digest = j.value("digest", "");
    for (const auto& o : j.at("outputs"))
      r.outputs.push_back({o.at("name").get<std::string>(), number_from(o.at("value")),
                           o.contains("se") ? number_from(o["se"]) : kNaN});
    for (const auto& c : j.at("checks"))
      r.checks.push_back({c.at("name").get<std::string>(), c.at("status").get<std::string>(),
                          c.value("detail", "")});
    if (j.contains("notes"))
      for (const auto& n : j["notes"]) r.notes.emplace_back(n.at("key").get<std::string>(), n.at("text").get<std::string>());
    if (j.contains("artifacts")) r.artifacts = j["artifacts"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kUsage, std::string("malformed report: ") + e.what());
  }
  return r;
}

void emit_report(const RunReport& r, ReportFormat format, std::ostream& out) {
  switch (format) {
    case ReportFormat::kJson:
      out << report_to_json(r).dump(2) << "\n";
      return;
    case ReportFormat::kCsv:
      out << "section,name,value,se,status,detail\n";
      for (const Output& o : r.outputs)
        out << "output," << csv_field(o.name) << "," << format_number(o.value) << ","
            << (std::isnan(o.se) ? "" : format_number(o.se)) << ",,\n";
      for (const Check& c : r.checks)
        out << "check," << csv_field(c.name) << ",,," << c.status << "," << csv_field(c.detail) << "\n";
      for (const auto& [k, v] : r.notes) out << "note," << csv_field(k) << ",,,," << csv_field(v) << "\n";
      return;
    case ReportFormat::kText: {
      out << "scenario " << r.id << " (" << r.kind << ") digest " << r.digest << "\n";
      std::size_t w = 4;
      for (const Output& o : r.outputs) w = std::max(w, o.name.size());
      for (const Check& c : r.checks) w = std::max(w, c.name.size());
      char line[512];
      if (!r.outputs.empty()) {
        std::snprintf(line, sizeof line, "  %-*s  %18s  %18s\n", static_cast<int>(w), "output", "value", "se");
        out << line;
        for (const Output& o : r.outputs) {
          std::snprintf(line, sizeof line, "  %-*s  %18s  %18s\n", static_cast<int>(w), o.name.c_str(),
                        format_number(o.value).c_str(), std::isnan(o.se) ? "" : format_number(o.se).c_str());
          out << line;
        }
      }
      for (const Check& c : r.checks) {
        std::snprintf(line, sizeof line, "  [%-11s] %-*s  ", c.status.c_str(), static_cast<int>(w), c.name.c_str());
        out << line << c.detail << "\n";
      }
      for (const auto& [k, v] : r.notes) out << "  note " << k << ": " << v << "\n";
      for (const std::string& a : r.artifacts) out << "  artifact " << a << "\n";
      return;
    }
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::kIo, "cannot write " + path);
  f << text;
  if (!f) throw Error(ErrorKind::kIo, "write failed for " + path);
}

}  // namespace bsdelab::harness
