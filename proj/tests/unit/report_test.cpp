#include "pfa/report.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "pfa/bp_algebra.hpp"

using namespace pfa;

namespace {

ReportRecord opnorm_record(Verdict expected_verdict) {
  // All-ones 2x2 at p = 2 has norm exactly 2; the record compares the solver
  // estimate against that constant.
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Ones(2, 2);
  auto E = QSLpSpace::lp(2, 2.0);
  NormEstimate est = opnorm(A, E, E);
  NormEstimate target = exact_estimate(expected_verdict == Verdict::PASS
                                           ? 2.0
                                           : 3.0);
  ReportRecord rec;
  rec.suite = "unit";
  rec.check_id = "unit/opnorm";
  rec.instance_hash = 42;
  rec.outcome = check_equal(est, target);
  rec.lhs_replay = replay_opnorm(A, E, E);
  rec.rhs_replay = replay_const();
  rec.wall_seconds = 0.25;
  return rec;
}

}  // namespace

TEST(Report, estimate_round_trips_through_json) {
  NormEstimate est;
  est.lower = 1.25;
  est.upper = 1.5;
  est.upper_certified = true;
  est.upper_kind = UpperKind::grid_slack;
  est.certified_upper = 1.75;
  est.witness = (Eigen::VectorXcd(2) << std::complex<double>(0.5, -0.25), 1.0)
                    .finished();
  est.method = NormMethod::brute_force;
  est.iterations = 17;
  est.converged = false;
  NormEstimate back = estimate_from_json(to_json(est));
  EXPECT_EQ(back.lower, est.lower);
  EXPECT_EQ(back.upper, est.upper);
  EXPECT_EQ(back.certified_upper, est.certified_upper);
  EXPECT_EQ(back.upper_certified, est.upper_certified);
  EXPECT_EQ(back.upper_kind, est.upper_kind);
  EXPECT_EQ(back.method, est.method);
  EXPECT_EQ(back.iterations, est.iterations);
  EXPECT_EQ(back.converged, est.converged);
  EXPECT_NEAR((back.witness - est.witness).norm(), 0.0, 0.0);
}

TEST(Report, infinite_bounds_survive_the_round_trip) {
  NormEstimate est;
  est.lower = 0.5;  // upper and certified_upper stay infinite
  NormEstimate back = estimate_from_json(to_json(est));
  EXPECT_TRUE(std::isinf(back.upper));
  EXPECT_TRUE(std::isinf(back.certified_upper));
  EXPECT_FALSE(back.upper_certified);
}

TEST(Report, record_round_trips_through_json) {
  ReportRecord rec = opnorm_record(Verdict::PASS);
  ReportRecord back = record_from_json(to_json(rec));
  EXPECT_EQ(back.suite, rec.suite);
  EXPECT_EQ(back.check_id, rec.check_id);
  EXPECT_EQ(back.instance_hash, rec.instance_hash);
  EXPECT_EQ(back.outcome.verdict, rec.outcome.verdict);
  EXPECT_EQ(back.outcome.relation, rec.outcome.relation);
  EXPECT_EQ(back.outcome.tolerance, rec.outcome.tolerance);
  EXPECT_EQ(back.outcome.lhs.lower, rec.outcome.lhs.lower);
  EXPECT_EQ(back.lhs_replay, rec.lhs_replay);
}

TEST(Report, replay_confirms_a_clean_record) {
  ReportRecord rec = opnorm_record(Verdict::PASS);
  ASSERT_EQ(rec.outcome.verdict, Verdict::PASS);
  ReplayResult res = replay_record(rec);
  EXPECT_EQ(res.verdict, Verdict::PASS);
  EXPECT_LE(res.lhs_drift, 1e-12);
  EXPECT_LE(res.rhs_drift, 1e-12);
}

TEST(Report, replay_rejects_tampered_values) {
  ReportRecord rec = opnorm_record(Verdict::PASS);
  rec.outcome.lhs.lower += 1e-3;
  EXPECT_THROW(replay_record(rec), ReplayMismatchError);
}

TEST(Report, replay_rejects_tampered_witnesses) {
  ReportRecord rec = opnorm_record(Verdict::PASS);
  // Rotating the witness away from the maximizer drops the achieved ratio,
  // so the recorded lower bound no longer replays.
  rec.outcome.lhs.witness(0) += std::complex<double>(0.4, 0.1);
  EXPECT_THROW(replay_record(rec), ReplayMismatchError);
}

TEST(Report, replay_needs_the_witness) {
  ReportRecord rec = opnorm_record(Verdict::PASS);
  rec.outcome.lhs.witness.resize(0);
  EXPECT_THROW(replay_record(rec), WitnessMissingError);
}

TEST(Report, replay_preserves_failures_and_gaps) {
  ReportRecord rec = opnorm_record(Verdict::FAIL);
  ASSERT_EQ(rec.outcome.verdict, Verdict::FAIL);
  ReplayResult res = replay_record(rec);
  EXPECT_EQ(res.verdict, Verdict::FAIL);
}

TEST(Report, pairing_ratio_payload_replays) {
  auto g = cyclic_group(2);
  Eigen::VectorXcd f(2), u(2);
  f << std::complex<double>(1.0, 1.0), -0.5;
  u << 2.0, std::complex<double>(0.0, 1.0);
  double den = 1.7;
  double value = std::abs(f.cwiseProduct(u).sum()) / den;

  NormEstimate lhs;
  lhs.lower = value;
  lhs.witness = f;
  lhs.method = NormMethod::boyd_multistart;

  ReportRecord rec;
  rec.suite = "unit";
  rec.check_id = "unit/pairing";
  rec.outcome = check_leq(lhs, exact_estimate(value + 1.0));
  rec.lhs_replay = replay_pairing_ratio(f, u, den);
  rec.rhs_replay = replay_const();
  ReplayResult res = replay_record(rec);
  EXPECT_EQ(res.verdict, Verdict::PASS);
  EXPECT_LE(res.lhs_drift, 1e-14);
}

TEST(Report, fourier_payload_replays_from_the_table) {
  auto g = cyclic_group(4);
  Eigen::VectorXcd u(4);
  u << 1.0, 0.5, -0.25, std::complex<double>(0.0, 0.75);
  double oracle = fourier_oracle_p2(bp_from_values(g, u));

  ReportRecord rec;
  rec.suite = "unit";
  rec.check_id = "unit/fourier";
  rec.outcome = check_equal(exact_estimate(oracle), exact_estimate(oracle));
  rec.lhs_replay = replay_fourier_p2(u, g);
  rec.rhs_replay = replay_const();
  ReplayResult res = replay_record(rec);
  EXPECT_EQ(res.verdict, Verdict::PASS);
  EXPECT_LE(res.lhs_drift, 1e-12);
}

TEST(Report, product_payload_multiplies_factor_replays) {
  NormEstimate a = exact_estimate(2.0);
  NormEstimate b = exact_estimate(3.0);
  ReportRecord rec;
  rec.suite = "unit";
  rec.check_id = "unit/product";
  rec.outcome = check_leq(exact_estimate(5.0), product_estimate(a, b));
  rec.lhs_replay = replay_const();
  rec.rhs_replay = replay_product({{a, replay_const()}, {b, replay_const()}});
  ReplayResult res = replay_record(rec);
  EXPECT_EQ(res.verdict, Verdict::PASS);
  EXPECT_LE(res.rhs_drift, 1e-14);
}

TEST(Report, shifted_payload_adds_the_offset) {
  NormEstimate inner = exact_estimate(1.5);
  ReportRecord rec;
  rec.suite = "unit";
  rec.check_id = "unit/shifted";
  rec.outcome = check_leq(exact_estimate(1.0), shifted_estimate(inner, 0.5));
  rec.lhs_replay = replay_const();
  rec.rhs_replay = replay_shifted(inner, replay_const(), 0.5);
  ReplayResult res = replay_record(rec);
  EXPECT_EQ(res.verdict, Verdict::PASS);
}

TEST(Report, inconclusive_records_replay_inconclusive) {
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Ones(2, 2);
  auto E = QSLpSpace::lp(2, 2.0);
  NormEstimate est = opnorm(A, E, E);
  NormEstimate loose;
  loose.lower = 2.0;  // no upper bound at all
  ReportRecord rec;
  rec.suite = "unit";
  rec.check_id = "unit/loose";
  rec.outcome = check_equal(est, loose);
  rec.lhs_replay = replay_opnorm(A, E, E);
  rec.rhs_replay = replay_const();
  ASSERT_EQ(rec.outcome.verdict, Verdict::INCONCLUSIVE);
  ReplayResult res = replay_record(rec);
  EXPECT_EQ(res.verdict, Verdict::INCONCLUSIVE);
}

TEST(Report, canonical_bytes_ignore_wall_clock) {
  ReportRecord a = opnorm_record(Verdict::PASS);
  ReportRecord b = a;
  b.wall_seconds = 99.0;
  std::string ra = render_canonical_report({a}, 7, 12345);
  std::string rb = render_canonical_report({b}, 7, 12345);
  EXPECT_EQ(ra, rb);
  EXPECT_NE(ra.find("\"version\""), std::string::npos);
  EXPECT_NE(ra.find("\"seed\""), std::string::npos);
}

TEST(Report, canonical_bytes_track_the_seed) {
  ReportRecord a = opnorm_record(Verdict::PASS);
  EXPECT_NE(render_canonical_report({a}, 7, 1),
            render_canonical_report({a}, 8, 1));
}

TEST(Report, table_mentions_suite_and_verdict) {
  ReportRecord a = opnorm_record(Verdict::PASS);
  std::string table = render_table({a});
  EXPECT_NE(table.find("unit/opnorm"), std::string::npos);
  EXPECT_NE(table.find("PASS"), std::string::npos);
}
