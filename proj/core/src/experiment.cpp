#include "pfa/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <thread>
#include <utility>

#include "pfa/pseudofunctions.hpp"

namespace pfa {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void config_fail(const std::string& field,
                              const std::string& msg) {
  throw ConfigError(field + ": " + msg);
}

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

Eigen::MatrixXcd kron_identity(const Eigen::MatrixXcd& scalar, int k) {
  Eigen::MatrixXcd out =
      Eigen::MatrixXcd::Zero(scalar.rows() * k, scalar.cols() * k);
  for (Eigen::Index i = 0; i < scalar.rows(); ++i)
    for (Eigen::Index j = 0; j < scalar.cols(); ++j)
      out.block(i * k, j * k, k, k) =
          scalar(i, j) * Eigen::MatrixXcd::Identity(k, k);
  return out;
}

Eigen::MatrixXcd blockdiag(const std::vector<Eigen::MatrixXcd>& blocks) {
  Eigen::Index rows = 0, cols = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rows, cols);
  Eigen::Index r = 0, c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

// Replay payload for pf_norm / matrix_pf_norm on one representation.
ordered_json array_payload(const RepPtr& rep, const GroupFunctionMatrix& F) {
  if (F.rows == 1) {
    GroupFunction f{rep->group(), F.at(0, 0)};
    return replay_opnorm(rep->lift_matrix(f), rep->space(), rep->space());
  }
  SpacePtr amp = amplify_space(rep->space(), F.rows);
  return replay_opnorm(amplified_lift(rep, F), amp, amp);
}

ordered_json scalar_payload(const RepPtr& rep, const GroupFunction& f) {
  return replay_opnorm(rep->lift_matrix(f), rep->space(), rep->space());
}

// Replay payload for family_norm / family_matrix_norm: the assembled
// block-diagonal operator on the direct-sum space, matching the embedded
// witness coordinates the solver reports.
ordered_json family_payload(const UniversalFamily& family,
                            const GroupFunctionMatrix& F) {
  std::vector<Eigen::MatrixXcd> blocks;
  std::vector<SpacePtr> spaces;
  for (const auto& rep : family.compute_reps) {
    if (F.rows == 1) {
      GroupFunction f{rep->group(), F.at(0, 0)};
      blocks.push_back(rep->lift_matrix(f));
      spaces.push_back(rep->space());
    } else {
      blocks.push_back(amplified_lift(rep, F));
      spaces.push_back(amplify_space(rep->space(), F.rows));
    }
  }
  SpacePtr joined = direct_sum_space(spaces);
  return replay_opnorm(blockdiag(blocks), joined, joined);
}

ordered_json family_payload(const UniversalFamily& family,
                            const GroupFunction& f) {
  GroupFunctionMatrix F;
  F.group = f.group;
  F.rows = F.cols = 1;
  F.entries.push_back(f.coeffs);
  return family_payload(family, F);
}

NormEstimate lower_estimate(const BpLower& lower) {
  NormEstimate est;
  est.lower = lower.value;
  est.method = NormMethod::boyd_multistart;
  est.iterations = lower.iterations;
  if (lower.witness.coeffs.size() > 0) est.witness = lower.witness.coeffs;
  return est;
}

ordered_json lower_payload(const BpLower& lower,
                           const Eigen::VectorXcd& u_values) {
  if (lower.witness.coeffs.size() == 0 ||
      !std::isfinite(lower.witness_norm.upper))
    return replay_const();
  return replay_pairing_ratio(lower.witness.coeffs, u_values,
                              lower.witness_norm.upper);
}

struct SuiteContext {
  const ExperimentConfig* cfg = nullptr;
  RepPtr rep;
  std::shared_ptr<const UniversalFamily> family;
};

std::uint64_t instance_key(const SuiteContext& ctx, const std::string& suite,
                           int i) {
  Hasher h;
  h.u64(ctx.cfg->config_hash).str(suite).i32(i);
  return h.digest();
}

CounterRng instance_rng(const SuiteContext& ctx, const std::string& suite,
                        int i) {
  return CounterRng(ctx.cfg->seed, instance_key(ctx, suite, i), 0);
}

ReportRecord make_record(const SuiteContext& ctx, const std::string& suite,
                         std::string check_id, int i, CheckOutcome outcome,
                         ordered_json lhs_replay, ordered_json rhs_replay,
                         double wall) {
  ReportRecord rec;
  rec.suite = suite;
  rec.check_id = std::move(check_id);
  rec.instance_hash = instance_key(ctx, suite, i);
  rec.outcome = std::move(outcome);
  rec.lhs_replay = std::move(lhs_replay);
  rec.rhs_replay = std::move(rhs_replay);
  rec.wall_seconds = wall;
  return rec;
}

using Task = std::function<std::vector<ReportRecord>()>;

void add_dinf_tasks(const SuiteContext& ctx, std::vector<Task>* tasks) {
  for (int i = 0; i < ctx.cfg->instances; ++i) {
    tasks->push_back([ctx, i] {
      CounterRng rng = instance_rng(ctx, "dinf", i);
      const int nu = 1 + (i % 2);
      const int nv = 1 + ((i / 2) % 2);
      GroupFunctionMatrix U =
          GroupFunctionMatrix::random(ctx.rep->group(), nu, nu, rng);
      GroupFunctionMatrix V =
          GroupFunctionMatrix::random(ctx.rep->group(), nv, nv, rng);
      double t0 = now_seconds();
      DinfReport report = axiom_check_dinf(ctx.rep, U, V, ctx.cfg->budgets);
      double wall = now_seconds() - t0;
      const GroupFunctionMatrix& winner =
          report.u_norm.lower >= report.v_norm.lower ? U : V;
      return std::vector<ReportRecord>{make_record(
          ctx, "dinf", "dinf/" + std::to_string(i), i, report.outcome,
          array_payload(ctx.rep, array_direct_sum(U, V)),
          array_payload(ctx.rep, winner), wall)};
    });
  }
}

void add_mp_tasks(const SuiteContext& ctx, std::vector<Task>* tasks) {
  for (int i = 0; i < ctx.cfg->instances; ++i) {
    tasks->push_back([ctx, i] {
      CounterRng rng = instance_rng(ctx, "mp", i);
      const int m = 1 + (i % 2);
      const int n = 1 + ((i / 2) % 2);
      GroupFunctionMatrix U =
          GroupFunctionMatrix::random(ctx.rep->group(), m, m, rng);
      Eigen::MatrixXcd alpha(n, m), beta(m, n);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < m; ++c) alpha(r, c) = rng.next_cnormal();
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < n; ++c) beta(r, c) = rng.next_cnormal();

      double t0 = now_seconds();
      MpReport report = axiom_check_mp(ctx.rep, U, alpha, beta,
                                       ctx.cfg->budgets);
      double wall = now_seconds() - t0;

      const int k = ctx.rep->dim();
      const double p = ctx.rep->space()->p();
      Eigen::MatrixXcd C = kron_identity(alpha, k) *
                           amplified_lift(ctx.rep, U) * kron_identity(beta, k);
      SpacePtr amp = amplify_space(ctx.rep->space(), n);
      ordered_json rhs = replay_product(
          {{report.alpha_norm,
            replay_opnorm(alpha, QSLpSpace::lp(m, p), QSLpSpace::lp(n, p))},
           {report.u_norm, array_payload(ctx.rep, U)},
           {report.beta_norm,
            replay_opnorm(beta, QSLpSpace::lp(n, p), QSLpSpace::lp(m, p))}});
      return std::vector<ReportRecord>{make_record(
          ctx, "mp", "mp/" + std::to_string(i), i, report.outcome,
          replay_opnorm(C, amp, amp), std::move(rhs), wall)};
    });
  }
}

void add_monotonicity_tasks(const SuiteContext& ctx,
                            std::vector<Task>* tasks) {
  for (int i = 0; i < ctx.cfg->instances; ++i) {
    tasks->push_back([ctx, i] {
      CounterRng rng = instance_rng(ctx, "monotonicity", i);
      const GroupPtr& group = ctx.rep->group();
      const int k = ctx.rep->dim();

      // Cyclic generators: coordinate deltas, the mean-free delta, the
      // constant vector, and random fills, cycled by instance.
      Eigen::VectorXcd xi;
      switch (i % 4) {
        case 0:
          xi = Eigen::VectorXcd::Unit(k, i % k);
          break;
        case 1:
          xi = Eigen::VectorXcd::Ones(k);
          break;
        case 2:
          xi = Eigen::VectorXcd::Unit(k, 0) -
               Eigen::VectorXcd::Ones(k) / static_cast<double>(k);
          break;
        default:
          xi.resize(k);
          for (int j = 0; j < k; ++j) xi(j) = rng.next_cnormal();
      }
      if (xi.norm() <= 1e-12) xi = Eigen::VectorXcd::Unit(k, 0);

      double t0 = now_seconds();
      CyclicSubrep sub = cyclic_subrep(ctx.rep, xi);
      GroupFunction f = random_function(group, rng);
      NormEstimate sub_scalar = pf_norm(sub.rep, f, ctx.cfg->budgets);
      NormEstimate big_scalar = pf_norm(ctx.rep, f, ctx.cfg->budgets);
      CheckOutcome scalar_oc = check_leq(sub_scalar, big_scalar);

      GroupFunctionMatrix F = GroupFunctionMatrix::random(group, 2, 2, rng);
      NormEstimate sub_arr = matrix_pf_norm(sub.rep, F, ctx.cfg->budgets);
      NormEstimate big_arr = matrix_pf_norm(ctx.rep, F, ctx.cfg->budgets);
      CheckOutcome array_oc = check_leq(sub_arr, big_arr);
      double wall = 0.5 * (now_seconds() - t0);

      std::vector<ReportRecord> out;
      out.push_back(make_record(ctx, "monotonicity",
                                "monotonicity/scalar/" + std::to_string(i), i,
                                scalar_oc, scalar_payload(sub.rep, f),
                                scalar_payload(ctx.rep, f), wall));
      out.push_back(make_record(ctx, "monotonicity",
                                "monotonicity/array/" + std::to_string(i), i,
                                array_oc, array_payload(sub.rep, F),
                                array_payload(ctx.rep, F), wall));
      return out;
    });
  }
}

void add_universal_gap_tasks(const SuiteContext& ctx,
                             std::vector<Task>* tasks) {
  const int count = static_cast<int>(ctx.cfg->probes.size());
  for (int i = 0; i < count; ++i) {
    tasks->push_back([ctx, i] {
      const GroupFunction& f = ctx.cfg->probes[static_cast<std::size_t>(i)];
      const UniversalFamily& family = *ctx.family;

      double t0 = now_seconds();
      NormEstimate base = pf_norm(ctx.rep, f, ctx.cfg->budgets);
      NormEstimate fam = family_norm(family, f, ctx.cfg->budgets);
      CheckOutcome never_exceeds = check_leq(fam, base);
      double shift = family.truncation() + family.worst_deficit;
      NormEstimate shifted = shifted_estimate(fam, shift);
      CheckOutcome truncation = check_leq(base, shifted, kGapGate);
      double wall = 0.5 * (now_seconds() - t0);

      ordered_json fam_replay = family_payload(family, f);
      std::vector<ReportRecord> out;
      out.push_back(make_record(
          ctx, "universal_gap", "gap/never_exceeds/" + std::to_string(i), i,
          never_exceeds, fam_replay, scalar_payload(ctx.rep, f), wall));
      out.push_back(make_record(
          ctx, "universal_gap", "gap/truncation/" + std::to_string(i), i,
          truncation, scalar_payload(ctx.rep, f),
          replay_shifted(fam, fam_replay, shift), wall));
      return out;
    });
  }
}

void add_amplified_tasks(const SuiteContext& ctx, std::vector<Task>* tasks) {
  for (int i = 0; i < ctx.cfg->instances; ++i) {
    tasks->push_back([ctx, i] {
      CounterRng rng = instance_rng(ctx, "amplified_isometry", i);
      const UniversalFamily& family = *ctx.family;

      // Arrays built from probe entries keep the truncation bound honest;
      // the never-exceeds direction holds for any array.
      const auto& probes = ctx.cfg->probes;
      GroupFunctionMatrix F;
      F.group = ctx.rep->group();
      F.rows = F.cols = 2;
      for (int slot = 0; slot < 4; ++slot) {
        std::size_t pick = rng.next_below(probes.size());
        F.entries.push_back(probes[pick].coeffs);
      }

      double t0 = now_seconds();
      AmplifiedIsometryReport report =
          amplified_isometry_check(family, F, kGapGate, ctx.cfg->budgets);
      double wall = 0.5 * (now_seconds() - t0);

      double shift = family.truncation() + family.worst_deficit;
      ordered_json fam_replay = family_payload(family, F);
      std::vector<ReportRecord> out;
      out.push_back(make_record(
          ctx, "amplified_isometry", "amp/never_exceeds/" + std::to_string(i),
          i, report.never_exceeds, fam_replay, array_payload(ctx.rep, F),
          wall));
      out.push_back(make_record(
          ctx, "amplified_isometry", "amp/truncation/" + std::to_string(i), i,
          report.truncation_bound, array_payload(ctx.rep, F),
          replay_shifted(report.family, fam_replay, shift), wall));
      return out;
    });
  }
}

void add_duality_tasks(const SuiteContext& ctx, std::vector<Task>* tasks) {
  for (int i = 0; i < ctx.cfg->instances; ++i) {
    tasks->push_back([ctx, i] {
      CounterRng rng = instance_rng(ctx, "duality", i);
      const SpacePtr& space = ctx.rep->space();
      const int k = ctx.rep->dim();

      Eigen::VectorXcd xi(k);
      for (int j = 0; j < k; ++j) xi(j) = rng.next_cnormal();
      Eigen::VectorXcd eta(space->ambient_dim());
      for (Eigen::Index j = 0; j < eta.size(); ++j)
        eta(j) = rng.next_cnormal();

      SpaceVector xi_v{space, xi};
      DualVector eta_v{space, eta};
      double t0 = now_seconds();
      BpElement u = coefficient_function(ctx.rep, xi_v, eta_v);
      BpLower lower = bp_norm_lower(*ctx.family, u, ctx.cfg->budgets);
      double bound = vector_norm(xi_v) * dual_norm(eta_v);
      CheckOutcome oc =
          check_leq(lower_estimate(lower), exact_estimate(bound), 1e-4);
      double wall = now_seconds() - t0;

      std::vector<ReportRecord> out;
      out.push_back(make_record(ctx, "duality",
                                "duality/realization/" + std::to_string(i), i,
                                oc, lower_payload(lower, u.values),
                                replay_const(), wall));

      if (i % 3 == 0) {
        Eigen::MatrixXcd phi(k, k);
        for (int r = 0; r < k; ++r)
          for (int c = 0; c < k; ++c) phi(r, c) = rng.next_cnormal();
        double t1 = now_seconds();
        DualityReport rep =
            duality_contractivity_check(*ctx.family, phi, ctx.cfg->budgets);
        double wall2 = now_seconds() - t1;
        ordered_json rhs = replay_const();
        if (rep.phi_norm.witness.size() > 0 && rep.phi_norm.lower > 0.0) {
          double num = std::abs(
              (rep.phi_norm.witness.array() * rep.u.values.array()).sum());
          rhs = replay_pairing_ratio(rep.phi_norm.witness, rep.u.values,
                                     num / rep.phi_norm.lower);
        }
        out.push_back(make_record(
            ctx, "duality", "duality/functional/" + std::to_string(i), i,
            rep.outcome, lower_payload(rep.u_lower, rep.u.values),
            std::move(rhs), wall2));
      }
      return out;
    });
  }
}

void add_cb_tasks(const SuiteContext& ctx, std::vector<Task>* tasks) {
  for (int i = 0; i < ctx.cfg->instances; ++i) {
    tasks->push_back([ctx, i] {
      CounterRng rng = instance_rng(ctx, "cb_functional", i);
      const GroupPtr& group = ctx.rep->group();
      const int order = group->order();
      const double p = ctx.rep->space()->p();

      Eigen::VectorXcd values(order);
      for (int j = 0; j < order; ++j) values(j) = rng.next_cnormal();
      BpElement u = bp_from_values(group, values);

      double t0 = now_seconds();
      CbReport report = cb_functional_check(*ctx.family, u, ctx.cfg->n_max,
                                            kGapGate, ctx.cfg->budgets);
      double wall =
          (now_seconds() - t0) / std::max<std::size_t>(1, report.outcomes.size());

      auto level_payload = [&](const BpMatrixLevel& level) -> ordered_json {
        if (level.estimate.witness.size() == 0 ||
            !std::isfinite(level.family_upper) || level.family_upper <= 0.0)
          return replay_const();
        if (level.n == 1)
          return replay_pairing_ratio(level.witness_array[0], values,
                                      level.family_upper);
        const int n = level.n;
        Eigen::MatrixXcd C(n, n);
        for (int s = 0; s < n; ++s)
          for (int t = 0; t < n; ++t)
            C(s, t) =
                (level.witness_array[static_cast<std::size_t>(s) * n + t]
                     .array() *
                 values.array())
                    .sum();
        NormEstimate num = mixed_scalar_norm(C, p, p, ctx.cfg->budgets);
        ordered_json payload =
            replay_opnorm(C / level.family_upper, QSLpSpace::lp(n, p),
                          QSLpSpace::lp(n, p));
        payload["witness"] = ordered_json::array();
        for (Eigen::Index j = 0; j < num.witness.size(); ++j)
          payload["witness"].push_back(ordered_json::array(
              {num.witness(j).real(), num.witness(j).imag()}));
        return payload;
      };

      std::vector<ReportRecord> out;
      for (std::size_t j = 0; j < report.outcomes.size(); ++j) {
        const BpMatrixLevel& level = report.levels[j + 1];
        out.push_back(make_record(
            ctx, "cb_functional",
            "cb/u" + std::to_string(i) + "/n" + std::to_string(level.n), i,
            report.outcomes[j], level_payload(level),
            level_payload(report.levels[0]), wall));
      }
      return out;
    });
  }
}

void add_p2_oracle_tasks(const SuiteContext& ctx, std::vector<Task>* tasks) {
  for (int i = 0; i < ctx.cfg->instances; ++i) {
    tasks->push_back([ctx, i] {
      CounterRng rng = instance_rng(ctx, "p2_oracle", i);
      const GroupPtr& group = ctx.rep->group();
      const int order = group->order();

      Eigen::VectorXcd values;
      std::string label;
      switch (i % 3) {
        case 0:
          values = Eigen::VectorXcd::Ones(order);
          label = "ones";
          break;
        case 1:
          values = Eigen::VectorXcd::Unit(order, group->identity());
          label = "delta_e";
          break;
        default: {
          values.resize(order);
          for (int j = 0; j < order; ++j) values(j) = rng.next_normal();
          label = "random_real";
        }
      }
      BpElement u = bp_from_values(group, values);

      double t0 = now_seconds();
      BpLower lower = bp_norm_lower(*ctx.family, u, ctx.cfg->budgets);
      BpUpper upper = bp_norm_upper(u, {ctx.rep}, ctx.cfg->budgets);
      double oracle = fourier_oracle_p2(u);
      double wall = 0.5 * (now_seconds() - t0);

      NormEstimate oracle_est = exact_estimate(oracle);
      ordered_json oracle_replay = replay_fourier_p2(values, group);

      std::vector<ReportRecord> out;
      out.push_back(make_record(
          ctx, "p2_oracle",
          "p2/lower_le_oracle/" + label + "/" + std::to_string(i), i,
          check_leq(lower_estimate(lower), oracle_est, kGapGate),
          lower_payload(lower, values), oracle_replay, wall));
      out.push_back(make_record(
          ctx, "p2_oracle",
          "p2/oracle_le_upper/" + label + "/" + std::to_string(i), i,
          check_leq(oracle_est, exact_estimate(upper.value), kGapGate),
          oracle_replay, replay_const(), wall));
      return out;
    });
  }
}

}  // namespace

const std::vector<std::string>& suite_registry() {
  static const std::vector<std::string> names = {
      "dinf",     "mp",      "monotonicity",  "universal_gap",
      "amplified_isometry", "duality", "cb_functional", "p2_oracle"};
  return names;
}

namespace {

bool suite_requested(const ExperimentConfig& cfg, const std::string& name) {
  return std::find(cfg.suites.begin(), cfg.suites.end(), name) !=
         cfg.suites.end();
}

bool needs_family(const ExperimentConfig& cfg) {
  for (const char* name : {"universal_gap", "amplified_isometry", "duality",
                           "cb_functional", "p2_oracle"})
    if (suite_requested(cfg, name)) return true;
  return false;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, int threads) {
  SuiteContext ctx;
  ctx.cfg = &config;
  ctx.rep = config.rep_kind == "trivial"
                ? trivial_rep(config.group, config.p)
                : left_regular(config.group, config.p);
  if (needs_family(config))
    ctx.family = std::make_shared<const UniversalFamily>(build_universal_family(
        ctx.rep, config.probes, config.r_max, config.budgets));

  std::vector<Task> tasks;
  for (const std::string& name : suite_registry()) {
    if (!suite_requested(config, name)) continue;
    if (name == "dinf") add_dinf_tasks(ctx, &tasks);
    else if (name == "mp") add_mp_tasks(ctx, &tasks);
    else if (name == "monotonicity") add_monotonicity_tasks(ctx, &tasks);
    else if (name == "universal_gap") add_universal_gap_tasks(ctx, &tasks);
    else if (name == "amplified_isometry") add_amplified_tasks(ctx, &tasks);
    else if (name == "duality") add_duality_tasks(ctx, &tasks);
    else if (name == "cb_functional") add_cb_tasks(ctx, &tasks);
    else if (name == "p2_oracle") add_p2_oracle_tasks(ctx, &tasks);
  }

  std::vector<std::vector<ReportRecord>> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  int workers = std::max(1, std::min<int>(threads,
                                          static_cast<int>(tasks.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      try {
        results[i] = tasks[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
        try {
          results[i] = tasks[i]();
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);

  RunResult out;
  for (auto& batch : results)
    for (auto& rec : batch) {
      switch (rec.outcome.verdict) {
        case Verdict::PASS: ++out.pass; break;
        case Verdict::FAIL: ++out.fail; break;
        case Verdict::INCONCLUSIVE: ++out.inconclusive; break;
      }
      out.records.push_back(std::move(rec));
    }
  return out;
}

void write_report_files(const ExperimentConfig& config,
                        const RunResult& result) {
  if (!config.records_path.empty()) {
    std::ofstream os(config.records_path);
    if (!os)
      throw ConfigError("output.records: cannot open '" +
                        config.records_path + "' for writing");
    os << render_canonical_report(result.records, config.seed,
                                  config.config_hash);
  }
  if (!config.table_path.empty()) {
    std::ofstream os(config.table_path);
    if (!os)
      throw ConfigError("output.table: cannot open '" + config.table_path +
                        "' for writing");
    os << render_table(result.records);
    os << "\npass " << result.pass << "  fail " << result.fail
       << "  inconclusive " << result.inconclusive << "\n";
  }
}

namespace {

double parse_p(const nlohmann::json& doc) {
  if (!doc.contains("p") || !doc.at("p").is_number())
    throw ConfigError("p must lie in (1, ∞)");
  double p = doc.at("p").get<double>();
  if (!(p > 1.0) || !std::isfinite(p))
    throw ConfigError("p must lie in (1, ∞)");
  return p;
}

GroupPtr parse_group(const nlohmann::json& doc, std::string* label) {
  if (!doc.contains("group") || !doc.at("group").is_object())
    config_fail("group", "required object with fields 'kind' and 'n'");
  const auto& g = doc.at("group");
  std::string kind = g.value("kind", std::string());
  if (!g.contains("n") || !g.at("n").is_number_integer())
    config_fail("group.n", "must be an integer");
  int n = g.at("n").get<int>();
  if (n < 1) config_fail("group.n", "must be positive");
  if (kind == "cyclic") {
    *label = "Z_" + std::to_string(n);
    return cyclic_group(n);
  }
  if (kind == "dihedral") {
    *label = "D_" + std::to_string(n);
    return dihedral_group(n);
  }
  config_fail("group.kind", "unknown kind '" + kind +
                                "' (expected 'cyclic' or 'dihedral')");
}

std::vector<GroupFunction> parse_probes(const nlohmann::json& doc,
                                        const GroupPtr& group,
                                        std::uint64_t seed) {
  nlohmann::json spec = doc.value("probes", nlohmann::json::object());
  if (!spec.is_object()) config_fail("probes", "must be an object");
  std::string kind = spec.value("kind", std::string("standard"));

  std::vector<GroupFunction> probes;
  if (kind == "standard") {
    const int n = group->order();
    for (int g = 0; g < n; ++g) probes.push_back(delta(group, g));
    probes.push_back(constant(group, 1.0));
    GroupFunction centered = delta(group, group->identity());
    centered.coeffs -=
        Eigen::VectorXcd::Ones(n) / static_cast<double>(n);
    probes.push_back(std::move(centered));
    int extra = spec.value("extra_random", 2);
    if (extra < 0) config_fail("probes.extra_random", "must be nonnegative");
    CounterRng rng(seed, group->hash(), 0x9b0e);
    for (int j = 0; j < extra; ++j)
      probes.push_back(random_function(group, rng));
    return probes;
  }
  if (kind == "explicit") {
    if (!spec.contains("values") || !spec.at("values").is_array() ||
        spec.at("values").empty())
      config_fail("probes.values", "must be a nonempty array of value lists");
    for (const auto& entry : spec.at("values")) {
      if (!entry.is_array() ||
          static_cast<int>(entry.size()) != group->order())
        config_fail("probes.values",
                    "each value list must have one entry per group element");
      Eigen::VectorXcd coeffs(group->order());
      Eigen::Index i = 0;
      for (const auto& v : entry) {
        if (v.is_number())
          coeffs(i++) = v.get<double>();
        else if (v.is_array() && v.size() == 2)
          coeffs(i++) = std::complex<double>(v.at(0).get<double>(),
                                             v.at(1).get<double>());
        else
          config_fail("probes.values",
                      "entries must be numbers or [re, im] pairs");
      }
      probes.push_back(GroupFunction{group, std::move(coeffs)});
    }
    return probes;
  }
  config_fail("probes.kind",
              "unknown kind '" + kind + "' (expected 'standard' or 'explicit')");
}

}  // namespace

namespace {
ExperimentConfig parse_checked(const nlohmann::json& doc);
}

ExperimentConfig ExperimentConfig::parse(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config root must be a json object");
  try {
    return parse_checked(doc);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field has the wrong type: ") +
                      e.what());
  }
}

namespace {
ExperimentConfig parse_checked(const nlohmann::json& doc) {
  ExperimentConfig cfg;
  cfg.group = parse_group(doc, &cfg.group_label);
  cfg.p = parse_p(doc);

  nlohmann::json rep = doc.value("representation", nlohmann::json::object());
  if (!rep.is_object()) config_fail("representation", "must be an object");
  cfg.rep_kind = rep.value("kind", std::string("regular"));
  if (cfg.rep_kind != "regular" && cfg.rep_kind != "trivial")
    config_fail("representation.kind",
                "unknown kind '" + cfg.rep_kind +
                    "' (expected 'regular' or 'trivial')");

  if (!doc.contains("seed"))
    config_fail("seed", "required (reproducible runs need an explicit seed)");
  if (!doc.at("seed").is_number_unsigned() &&
      !doc.at("seed").is_number_integer())
    config_fail("seed", "must be a nonnegative integer");
  cfg.seed = doc.at("seed").get<std::uint64_t>();

  cfg.r_max = doc.value("r_max", 2);
  if (cfg.r_max < 1) config_fail("r_max", "must be at least 1");
  cfg.instances = doc.value("instances", 4);
  if (cfg.instances < 1) config_fail("instances", "must be at least 1");
  cfg.n_max = doc.value("n_max", 2);
  if (cfg.n_max < 1 || cfg.n_max > 4)
    config_fail("n_max", "must lie between 1 and 4");

  nlohmann::json budgets = doc.value("budgets", nlohmann::json::object());
  if (!budgets.is_object()) config_fail("budgets", "must be an object");
  cfg.budgets.starts = budgets.value("starts", cfg.budgets.starts);
  if (cfg.budgets.starts < 1) config_fail("budgets.starts", "must be positive");
  cfg.budgets.max_iterations =
      budgets.value("max_iterations", cfg.budgets.max_iterations);
  if (cfg.budgets.max_iterations < 1)
    config_fail("budgets.max_iterations", "must be positive");
  cfg.budgets.tolerance = budgets.value("tolerance", cfg.budgets.tolerance);
  if (!(cfg.budgets.tolerance > 0.0))
    config_fail("budgets.tolerance", "must be positive");
  cfg.budgets.bruteforce_resolution = budgets.value(
      "bruteforce_resolution", cfg.budgets.bruteforce_resolution);
  if (cfg.budgets.bruteforce_resolution < 4)
    config_fail("budgets.bruteforce_resolution", "must be at least 4");
  cfg.budgets.polish_count =
      budgets.value("polish_count", cfg.budgets.polish_count);
  cfg.budgets.seed = cfg.seed;

  if (!doc.contains("suites") || !doc.at("suites").is_array() ||
      doc.at("suites").empty())
    config_fail("suites", "required nonempty array of suite names");
  for (const auto& s : doc.at("suites")) {
    if (!s.is_string()) config_fail("suites", "entries must be strings");
    std::string name = s.get<std::string>();
    const auto& registry = suite_registry();
    if (std::find(registry.begin(), registry.end(), name) == registry.end())
      config_fail("suites", "unknown suite '" + name + "'");
    if (std::find(cfg.suites.begin(), cfg.suites.end(), name) !=
        cfg.suites.end())
      config_fail("suites", "duplicate suite '" + name + "'");
    cfg.suites.push_back(std::move(name));
  }
  if (suite_requested(cfg, "p2_oracle")) {
    if (cfg.p != 2.0)
      config_fail("suites", "p2_oracle requires p = 2");
    if (!cfg.group->is_abelian())
      config_fail("suites", "p2_oracle requires an abelian group");
    if (cfg.rep_kind != "regular")
      config_fail("suites",
                  "p2_oracle requires the regular representation");
  }

  cfg.probes = parse_probes(doc, cfg.group, cfg.seed);

  nlohmann::json output = doc.value("output", nlohmann::json::object());
  if (!output.is_object()) config_fail("output", "must be an object");
  cfg.records_path = output.value("records", cfg.records_path);
  cfg.table_path = output.value("table", cfg.table_path);

  cfg.config_hash = Hasher().str(doc.dump()).digest();
  return cfg;
}
}  // namespace

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid json: " + e.what());
  }
  return parse(doc);
}

}  // namespace pfa
