#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pfa/experiment.hpp"
#include "pfa/report.hpp"

namespace {

int do_run(const std::string& config_path, bool seed_set,
           std::uint64_t seed_override, int threads,
           const std::string& out_dir) {
  pfa::ExperimentConfig cfg = pfa::ExperimentConfig::parse_file(config_path);
  if (seed_set) {
    cfg.seed = seed_override;
    cfg.budgets.seed = seed_override;
  }
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    cfg.records_path = (std::filesystem::path(out_dir) / "report.json").string();
    cfg.table_path = (std::filesystem::path(out_dir) / "report.txt").string();
  }

  pfa::RunResult result = pfa::run_experiment(cfg, threads);
  pfa::write_report_files(cfg, result);

  std::cout << cfg.group_label << ", p = " << cfg.p << ", seed = " << cfg.seed
            << '\n'
            << "pass " << result.pass << "  fail " << result.fail
            << "  inconclusive " << result.inconclusive << '\n';
  if (!cfg.records_path.empty())
    std::cout << "records: " << cfg.records_path << '\n';
  if (!cfg.table_path.empty())
    std::cout << "table:   " << cfg.table_path << '\n';
  return result.exit_code();
}

int do_replay(const std::string& record_path) {
  std::ifstream is(record_path);
  if (!is)
    throw pfa::ConfigError("cannot read record file '" + record_path + "'");
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw pfa::ConfigError("record file '" + record_path +
                           "' is not valid json: " + e.what());
  }

  std::vector<nlohmann::ordered_json> items;
  if (doc.is_object() && doc.contains("records"))
    for (const auto& rec : doc.at("records")) items.push_back(rec);
  else
    items.push_back(doc);

  int mismatches = 0;
  for (const auto& item : items) {
    pfa::ReportRecord rec = pfa::record_from_json(item);
    try {
      pfa::ReplayResult r = pfa::replay_record(rec);
      std::cout << rec.suite << '/' << rec.check_id << "  "
                << pfa::to_string(r.verdict) << "  drift "
                << std::max(r.lhs_drift, r.rhs_drift) << '\n';
    } catch (const pfa::ReplayMismatchError& e) {
      ++mismatches;
      std::cout << rec.suite << '/' << rec.check_id << "  MISMATCH  "
                << e.what() << '\n';
    }
  }
  if (mismatches > 0) {
    std::cout << mismatches << " record(s) failed to replay\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pfalab: norm experiments on finite-group pseudofunction "
               "algebras and their coefficient-function duals"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed_override = 0;
  int threads = 1;

  CLI::App* run = app.add_subcommand("run", "run the suites in a config file");
  run->add_option("config", config_path, "experiment config (json)")
      ->required();
  CLI::Option* seed_opt =
      run->add_option("--seed", seed_override, "override the config seed");
  run->add_option("--threads", threads,
                  "worker threads for suite instances (records do not "
                  "depend on this)")
      ->check(CLI::Range(1, 256));
  run->add_option("--out", out_dir,
                  "directory for report files (overrides config paths)");

  std::string record_path;
  CLI::App* replay = app.add_subcommand(
      "replay", "recheck a report or single record from stored witnesses");
  replay->add_option("record", record_path, "report json or single record")
      ->required();

  CLI::App* list =
      app.add_subcommand("list-suites", "print the suite registry");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (const std::string& name : pfa::suite_registry())
        std::cout << name << '\n';
      return 0;
    }
    if (run->parsed())
      return do_run(config_path, seed_opt->count() > 0, seed_override,
                    threads, out_dir);
    if (replay->parsed()) return do_replay(record_path);
  } catch (const pfa::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const pfa::WitnessMissingError& e) {
    std::cerr << "replay error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
