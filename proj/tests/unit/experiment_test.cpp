#include "pfa/experiment.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <complex>
#include <cstdio>
#include <fstream>

using namespace pfa;
using nlohmann::json;

namespace {

json base_config() {
  return json{
      {"group", {{"kind", "cyclic"}, {"n", 2}}},
      {"p", 2.0},
      {"representation", {{"kind", "regular"}}},
      {"probes", {{"kind", "standard"}, {"extra_random", 0}}},
      {"r_max", 2},
      {"instances", 1},
      {"n_max", 2},
      {"budgets", {{"starts", 4}, {"max_iterations", 60}}},
      {"seed", 5},
      {"suites", {"dinf", "universal_gap", "p2_oracle"}},
  };
}

}  // namespace

TEST(ExperimentConfig, parses_a_minimal_document) {
  ExperimentConfig cfg = ExperimentConfig::parse(base_config());
  EXPECT_EQ(cfg.group_label, "Z_2");
  EXPECT_EQ(cfg.group->order(), 2);
  EXPECT_EQ(cfg.p, 2.0);
  EXPECT_EQ(cfg.seed, 5u);
  EXPECT_EQ(cfg.budgets.seed, 5u);
  // Standard probes: one mass per element, the constant, and the centered
  // mass at the identity.
  EXPECT_EQ(cfg.probes.size(), 4u);
  EXPECT_EQ(cfg.suites.size(), 3u);
  EXPECT_NE(cfg.config_hash, 0u);
}

TEST(ExperimentConfig, dihedral_label) {
  json doc = base_config();
  doc["group"] = {{"kind", "dihedral"}, {"n", 3}};
  doc["suites"] = {"dinf"};
  ExperimentConfig cfg = ExperimentConfig::parse(doc);
  EXPECT_EQ(cfg.group_label, "D_3");
  EXPECT_EQ(cfg.group->order(), 6);
}

TEST(ExperimentConfig, explicit_probe_values) {
  json doc = base_config();
  doc["probes"] = {{"kind", "explicit"},
                   {"values", {{1.0, -1.0}, {{1.0, 2.0}, {0.0, -1.0}}}}};
  ExperimentConfig cfg = ExperimentConfig::parse(doc);
  ASSERT_EQ(cfg.probes.size(), 2u);
  EXPECT_NEAR(std::abs(cfg.probes[0](1) - std::complex<double>(-1.0)), 0.0, 0.0);
  EXPECT_NEAR(std::abs(cfg.probes[1](0) - std::complex<double>(1.0, 2.0)), 0.0,
              0.0);
}

TEST(ExperimentConfig, rejects_boundary_exponents) {
  for (double p : {1.0, 0.5, -2.0}) {
    json doc = base_config();
    doc["p"] = p;
    doc["suites"] = {"dinf"};
    try {
      ExperimentConfig::parse(doc);
      FAIL() << "p=" << p << " should not parse";
    } catch (const ConfigError& e) {
      EXPECT_STREQ(e.what(), "p must lie in (1, ∞)");
    }
  }
}

TEST(ExperimentConfig, requires_a_seed) {
  json doc = base_config();
  doc.erase("seed");
  try {
    ExperimentConfig::parse(doc);
    FAIL() << "missing seed should not parse";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("seed"), std::string::npos);
  }
}

TEST(ExperimentConfig, rejects_unknown_and_duplicate_suites) {
  json doc = base_config();
  doc["suites"] = {"dinf", "nonsense"};
  EXPECT_THROW(ExperimentConfig::parse(doc), ConfigError);
  doc["suites"] = {"dinf", "dinf"};
  EXPECT_THROW(ExperimentConfig::parse(doc), ConfigError);
  doc["suites"] = json::array();
  EXPECT_THROW(ExperimentConfig::parse(doc), ConfigError);
}

TEST(ExperimentConfig, p2_oracle_preconditions) {
  json doc = base_config();
  doc["p"] = 3.0;
  doc["suites"] = {"p2_oracle"};
  EXPECT_THROW(ExperimentConfig::parse(doc), ConfigError);

  doc = base_config();
  doc["group"] = {{"kind", "dihedral"}, {"n", 3}};
  doc["suites"] = {"p2_oracle"};
  EXPECT_THROW(ExperimentConfig::parse(doc), ConfigError);

  doc = base_config();
  doc["representation"] = {{"kind", "trivial"}};
  doc["suites"] = {"p2_oracle"};
  EXPECT_THROW(ExperimentConfig::parse(doc), ConfigError);
}

TEST(ExperimentConfig, rejects_wrongly_typed_fields) {
  json doc = base_config();
  doc["r_max"] = "four";
  EXPECT_THROW(ExperimentConfig::parse(doc), ConfigError);
  doc = base_config();
  doc["budgets"] = {{"starts", 0}};
  EXPECT_THROW(ExperimentConfig::parse(doc), ConfigError);
  doc = base_config();
  doc["n_max"] = 9;
  EXPECT_THROW(ExperimentConfig::parse(doc), ConfigError);
}

TEST(ExperimentConfig, parse_file_reports_bad_paths_and_bad_json) {
  EXPECT_THROW(ExperimentConfig::parse_file("/nonexistent/config.json"),
               ConfigError);
  const char* path = "/tmp/pfalab_bad_config.json";
  {
    std::ofstream out(path);
    out << "{ not json";
  }
  EXPECT_THROW(ExperimentConfig::parse_file(path), ConfigError);
  std::remove(path);
}

TEST(Experiment, run_produces_records_with_consistent_counts) {
  ExperimentConfig cfg = ExperimentConfig::parse(base_config());
  RunResult result = run_experiment(cfg, 1);
  EXPECT_FALSE(result.records.empty());
  int pass = 0, fail = 0, inconclusive = 0;
  for (const auto& rec : result.records) {
    switch (rec.outcome.verdict) {
      case Verdict::PASS: ++pass; break;
      case Verdict::FAIL: ++fail; break;
      case Verdict::INCONCLUSIVE: ++inconclusive; break;
    }
  }
  EXPECT_EQ(result.pass, pass);
  EXPECT_EQ(result.fail, fail);
  EXPECT_EQ(result.inconclusive, inconclusive);
  EXPECT_EQ(result.exit_code(), fail > 0 ? 1 : 0);
  // The axioms hold at p = 2 where every bound is certified, so nothing in
  // this run can fail.
  EXPECT_EQ(result.fail, 0);
}

TEST(Experiment, records_replay_cleanly) {
  ExperimentConfig cfg = ExperimentConfig::parse(base_config());
  RunResult result = run_experiment(cfg, 1);
  for (const auto& rec : result.records) {
    ReplayResult res = replay_record(rec);
    EXPECT_EQ(res.verdict, rec.outcome.verdict) << rec.check_id;
    EXPECT_LE(res.lhs_drift, 1e-7) << rec.check_id;
    EXPECT_LE(res.rhs_drift, 1e-7) << rec.check_id;
  }
}

TEST(Experiment, reruns_are_byte_identical) {
  ExperimentConfig cfg = ExperimentConfig::parse(base_config());
  RunResult a = run_experiment(cfg, 1);
  RunResult b = run_experiment(cfg, 1);
  EXPECT_EQ(render_canonical_report(a.records, cfg.seed, cfg.config_hash),
            render_canonical_report(b.records, cfg.seed, cfg.config_hash));
}

TEST(Experiment, thread_count_does_not_change_the_report) {
  ExperimentConfig cfg = ExperimentConfig::parse(base_config());
  RunResult serial = run_experiment(cfg, 1);
  RunResult pooled = run_experiment(cfg, 3);
  EXPECT_EQ(render_canonical_report(serial.records, cfg.seed, cfg.config_hash),
            render_canonical_report(pooled.records, cfg.seed, cfg.config_hash));
}

TEST(Experiment, seed_changes_the_report) {
  json doc = base_config();
  ExperimentConfig a = ExperimentConfig::parse(doc);
  doc["seed"] = 6;
  ExperimentConfig b = ExperimentConfig::parse(doc);
  RunResult ra = run_experiment(a, 1);
  RunResult rb = run_experiment(b, 1);
  EXPECT_NE(render_canonical_report(ra.records, a.seed, a.config_hash),
            render_canonical_report(rb.records, b.seed, b.config_hash));
}

TEST(Experiment, write_report_files) {
  ExperimentConfig cfg = ExperimentConfig::parse(base_config());
  cfg.records_path = "/tmp/pfalab_test_report.json";
  cfg.table_path = "/tmp/pfalab_test_report.txt";
  RunResult result = run_experiment(cfg, 1);
  write_report_files(cfg, result);

  std::ifstream records(cfg.records_path);
  ASSERT_TRUE(records.good());
  json doc = json::parse(records);
  EXPECT_EQ(doc.at("version").get<int>(), 1);
  EXPECT_EQ(doc.at("records").size(), result.records.size());

  std::ifstream table(cfg.table_path);
  ASSERT_TRUE(table.good());
  std::string line;
  std::getline(table, line);
  EXPECT_NE(line.find("suite"), std::string::npos);

  std::remove(cfg.records_path.c_str());
  std::remove(cfg.table_path.c_str());
}

TEST(Experiment, registry_lists_every_suite_once) {
  const auto& reg = suite_registry();
  EXPECT_EQ(reg.size(), 8u);
  for (const auto& name : reg) {
    EXPECT_EQ(std::count(reg.begin(), reg.end(), name), 1) << name;
  }
}
