#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pfa/bp_algebra.hpp"
#include "pfa/report.hpp"

namespace pfa {

// Names the runner understands, in the order suites execute.
const std::vector<std::string>& suite_registry();

// Parsed and validated experiment description. `parse` throws ConfigError
// with the offending field in the message; a parsed config is always
// runnable.
struct ExperimentConfig {
  GroupPtr group;
  std::string group_label;
  double p = 2.0;
  std::string rep_kind = "regular";  // "regular" or "trivial"
  std::vector<GroupFunction> probes;
  int r_max = 2;
  int instances = 4;
  int n_max = 2;
  SolverOptions budgets;
  std::uint64_t seed = 0;
  std::vector<std::string> suites;
  std::string records_path = "report.json";
  std::string table_path = "report.txt";
  std::uint64_t config_hash = 0;

  static ExperimentConfig parse(const nlohmann::json& doc);
  static ExperimentConfig parse_file(const std::string& path);
};

struct RunResult {
  std::vector<ReportRecord> records;
  int pass = 0;
  int fail = 0;
  int inconclusive = 0;

  int exit_code() const { return fail > 0 ? 1 : 0; }
};

// Runs every configured suite. Instances are independent; `threads` > 1
// fans them out over a pool, and records always come back in generation
// order so the structured report bytes do not depend on the thread count.
RunResult run_experiment(const ExperimentConfig& config, int threads = 1);

// Writes the canonical structured report and the human-readable table to
// the configured paths (empty path skips that file).
void write_report_files(const ExperimentConfig& config,
                        const RunResult& result);

}  // namespace pfa
