#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "bsdelab/errors.hpp"
#include "bsdelab/harness/catalog.hpp"
#include "bsdelab/harness/report.hpp"
#include "bsdelab/harness/runner.hpp"
#include "bsdelab/harness/scenario.hpp"
#include "bsdelab/parallel.hpp"

namespace {

using namespace bsdelab;
using namespace bsdelab::harness;

constexpr int kExitUsage = 64;

struct RunArgs {
  std::string out_dir;
  std::string format = "table-text";
  int jobs = 0;
};

const char* extension(ReportFormat f) {
  switch (f) {
    case ReportFormat::kText: return "txt";
    case ReportFormat::kCsv: return "csv";
    case ReportFormat::kJson: return "json";
  }
  return "txt";
}

int execute(const Json& config, const RunArgs& args) {
  const ReportFormat format = parse_format(args.format);
  if (args.jobs < 0) throw Error(ErrorKind::kUsage, "--jobs must be positive");
  if (args.jobs > 0) set_jobs(args.jobs);
  const Scenario scenario = parse_scenario(config);

  const auto start = std::chrono::steady_clock::now();
  RunReport report = run_scenario(scenario, RunOptions{args.out_dir});
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::ostringstream text;
  emit_report(report, format, text);
  std::cout << text.str();
  if (!args.out_dir.empty()) {
    std::filesystem::create_directories(args.out_dir);
    const std::filesystem::path dir(args.out_dir);
    std::ostringstream json;
    emit_report(report, ReportFormat::kJson, json);
    write_file((dir / "report.json").string(), json.str());
    if (format != ReportFormat::kJson)
      write_file((dir / (std::string("report.") + extension(format))).string(), text.str());
    Json timing{{"id", report.id}, {"wall_seconds", report.wall_seconds}, {"jobs", jobs()}};
    write_file((dir / "timing.json").string(), timing.dump(2) + "\n");
  }
  return report.exit_code();
}

void add_run_options(CLI::App* cmd, RunArgs& args) {
  cmd->add_option("--out", args.out_dir, "directory for report.json, report.<fmt>, timing.json and artifacts");
  cmd->add_option("--format", args.format, "table-text | csv | structured-records")->capture_default_str();
  cmd->add_option("--jobs", args.jobs, "worker cap (default: $BSDELAB_JOBS or all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bsdelab: weighted BSDE scenarios, oracles and reports"};
  app.require_subcommand(1);

  RunArgs run_args;
  std::string config_path;
  CLI::App* run = app.add_subcommand("run", "run a scenario config file");
  run->add_option("config", config_path, "scenario JSON")->required();
  add_run_options(run, run_args);

  CLI::App* cat = app.add_subcommand("catalog", "built-in scenarios");
  cat->require_subcommand(1);
  CLI::App* cat_list = cat->add_subcommand("list", "list catalog ids");
  std::string cat_id;
  CLI::App* cat_show = cat->add_subcommand("show", "print the config of a catalog entry");
  cat_show->add_option("id", cat_id)->required();
  RunArgs cat_args;
  std::string override_json;
  CLI::App* cat_run = cat->add_subcommand("run", "run a catalog entry");
  cat_run->add_option("id", cat_id)->required();
  cat_run->add_option("--override", override_json, "JSON merge patch applied over the entry");
  add_run_options(cat_run, cat_args);

  std::string report_path, report_format = "table-text", report_out;
  CLI::App* rep = app.add_subcommand("report", "re-emit a saved report.json");
  rep->add_option("path", report_path)->required();
  rep->add_option("--format", report_format, "table-text | csv | structured-records")->capture_default_str();
  rep->add_option("--out", report_out, "write to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (run->parsed()) return execute(load_config_file(config_path), run_args);
    if (cat_list->parsed()) {
      for (const CatalogEntry& e : catalog()) std::printf("%-28s %s\n", e.id, e.title);
      return 0;
    }
    if (cat_show->parsed()) {
      std::cout << catalog_config(cat_id).dump(2) << "\n";
      return 0;
    }
    if (cat_run->parsed()) {
      Json config{{"catalog", cat_id}};
      if (!override_json.empty()) {
        Json patch;
        try {
          patch = Json::parse(override_json);
        } catch (const Json::exception& e) {
          throw Error(ErrorKind::kUsage, std::string("--override: ") + e.what());
        }
        if (!patch.is_object()) throw Error(ErrorKind::kUsage, "--override must be a JSON object");
        config.update(patch);
        config["catalog"] = cat_id;
      }
      return execute(config, cat_args);
    }
    if (rep->parsed()) {
      const RunReport report = report_from_json(load_config_file(report_path));
      std::ostringstream text;
      emit_report(report, parse_format(report_format), text);
      if (report_out.empty())
        std::cout << text.str();
      else
        write_file(report_out, text.str());
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "bsdelab: " << e.what() << "\n";
    return e.kind() == ErrorKind::kUsage ? kExitUsage : 2;
  } catch (const std::exception& e) {
    std::cerr << "bsdelab: " << e.what() << "\n";
    return 2;
  }
  return kExitUsage;
}
