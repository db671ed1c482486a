#include "pfa/bp_algebra.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>

using namespace pfa;

namespace {

std::vector<GroupFunction> delta_probes(const GroupPtr& g) {
  std::vector<GroupFunction> probes;
  for (int x = 0; x < g->order(); ++x) probes.push_back(delta(g, x));
  return probes;
}

UniversalFamily regular_family(const GroupPtr& g, double p, int r_max = 2) {
  return build_universal_family(left_regular(g, p), delta_probes(g), r_max);
}

// Absolute Fourier coefficient sum of a function on Z_n, written against the
// explicit characters k -> exp(2 pi i j k / n).
double dft_abs_sum(const Eigen::VectorXcd& u) {
  const int n = static_cast<int>(u.size());
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    std::complex<double> hat = 0.0;
    for (int k = 0; k < n; ++k) {
      double angle = -2.0 * 3.14159265358979323846 * j * k / n;
      hat += u(k) * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    total += std::abs(hat) / n;
  }
  return total;
}

}  // namespace

TEST(BpElement, coefficient_function_values) {
  // With xi the mass at the identity and eta the indicator of x, the
  // coefficient function of the regular representation is the indicator
  // of x itself: <lambda(g) delta_e, delta_x> = [g == x].
  auto g = cyclic_group(3);
  auto rep = left_regular(g, 2.0);
  for (int x = 0; x < 3; ++x) {
    SpaceVector xi(rep->space(), Eigen::VectorXcd::Unit(3, 0));
    DualVector eta(rep->space(), Eigen::VectorXcd::Unit(3, x));
    BpElement u = coefficient_function(rep, xi, eta);
    for (int a = 0; a < 3; ++a) {
      double expected = (a == x) ? 1.0 : 0.0;
      EXPECT_NEAR(std::abs(u.values(a) - expected), 0.0, 1e-14);
    }
    ASSERT_TRUE(u.realization.has_value());
    EXPECT_LE(pairing_realization_residual(delta(g, 1), u), 1e-12);
  }
}

TEST(BpElement, pairing_is_the_bilinear_sum) {
  auto g = cyclic_group(2);
  GroupFunction f(g, (Eigen::VectorXcd(2) << std::complex<double>(1.0, 2.0),
                      -3.0).finished());
  BpElement u = bp_from_values(
      g, (Eigen::VectorXcd(2) << std::complex<double>(0.0, 1.0), 2.0)
             .finished());
  std::complex<double> expected =
      f(0) * u.values(0) + f(1) * u.values(1);
  EXPECT_NEAR(std::abs(pairing(f, u) - expected), 0.0, 1e-14);
}

TEST(BpElement, pointwise_product) {
  auto g = cyclic_group(3);
  BpElement u = bp_from_values(g, (Eigen::VectorXcd(3) << 1.0, 2.0, 3.0).finished());
  BpElement v = bp_from_values(
      g, (Eigen::VectorXcd(3) << -1.0, std::complex<double>(0.0, 1.0), 0.5)
             .finished());
  BpElement w = pointwise_product(u, v);
  for (int x = 0; x < 3; ++x) {
    EXPECT_NEAR(std::abs(w.values(x) - u.values(x) * v.values(x)), 0.0, 1e-14);
  }
  EXPECT_FALSE(w.realization.has_value());
}

TEST(BpElement, perturbed_values_break_the_realization) {
  auto g = cyclic_group(2);
  auto rep = left_regular(g, 2.0);
  SpaceVector xi(rep->space(), Eigen::VectorXcd::Unit(2, 0));
  DualVector eta(rep->space(), Eigen::VectorXcd::Unit(2, 1));
  BpElement u = coefficient_function(rep, xi, eta);
  u.values(0) += 0.25;
  EXPECT_GT(pairing_realization_residual(delta(g, 0), u), 0.1);
}

TEST(FourierOracle, constant_and_point_mass) {
  // The constant function is the trivial character: one unit Fourier
  // coefficient. The point mass at the identity spreads 1/n to every
  // character, again summing to 1.
  for (int n : {2, 3, 4}) {
    auto g = cyclic_group(n);
    EXPECT_NEAR(fourier_oracle_p2(bp_from_values(
                    g, Eigen::VectorXcd::Ones(n))),
                1.0, 1e-10)
        << "n=" << n;
    EXPECT_NEAR(fourier_oracle_p2(bp_from_values(
                    g, Eigen::VectorXcd::Unit(n, 0))),
                1.0, 1e-10)
        << "n=" << n;
  }
}

TEST(FourierOracle, sign_character_on_z2) {
  auto g = cyclic_group(2);
  BpElement u = bp_from_values(g, (Eigen::VectorXcd(2) << 1.0, -1.0).finished());
  EXPECT_NEAR(fourier_oracle_p2(u), 1.0, 1e-12);
}

TEST(FourierOracle, matches_the_explicit_dft_on_z4) {
  auto g = cyclic_group(4);
  CounterRng rng(107, 25, 0);
  for (int trial = 0; trial < 4; ++trial) {
    Eigen::VectorXcd values(4);
    for (int i = 0; i < 4; ++i) values(i) = rng.next_cnormal();
    BpElement u = bp_from_values(g, values);
    EXPECT_NEAR(fourier_oracle_p2(u), dft_abs_sum(values), 1e-9)
        << "trial=" << trial;
  }
}

TEST(FourierOracle, homogeneous) {
  auto g = cyclic_group(3);
  Eigen::VectorXcd values(3);
  values << 1.0, 0.5, std::complex<double>(0.0, -2.0);
  double base = fourier_oracle_p2(bp_from_values(g, values));
  double doubled = fourier_oracle_p2(bp_from_values(g, 2.0 * values));
  EXPECT_NEAR(doubled, 2.0 * base, 1e-10);
}

TEST(FourierOracle, rejects_nonabelian_groups) {
  auto g = dihedral_group(3);
  EXPECT_THROW(fourier_oracle_p2(bp_from_values(g, Eigen::VectorXcd::Ones(6))),
               NotAbelianError);
}

TEST(BpNormLower, point_mass_is_norm_one_at_p2) {
  auto g = cyclic_group(2);
  UniversalFamily fam = regular_family(g, 2.0);
  SolverOptions opts;
  opts.starts = 8;
  opts.max_iterations = 200;
  BpLower lower = bp_norm_lower(fam, bp_from_values(g, Eigen::VectorXcd::Unit(2, 0)),
                                opts);
  EXPECT_FALSE(lower.unbounded);
  EXPECT_GE(lower.value, 1.0 - 1e-2);
  EXPECT_LE(lower.value, 1.0 + 1e-3);
  EXPECT_LE(lower.certified, lower.value + 1e-12);
}

TEST(BpNormLower, witness_replays_the_value) {
  auto g = cyclic_group(3);
  UniversalFamily fam = regular_family(g, 2.0);
  CounterRng rng(109, 26, 0);
  Eigen::VectorXcd values(3);
  for (int i = 0; i < 3; ++i) values(i) = rng.next_cnormal();
  SolverOptions opts;
  opts.starts = 8;
  opts.max_iterations = 200;
  BpLower lower = bp_norm_lower(fam, bp_from_values(g, values), opts);
  ASSERT_GT(lower.witness.coeffs.size(), 0);
  double replayed = std::abs(pairing(lower.witness, bp_from_values(g, values))) /
                    lower.witness_norm.upper;
  EXPECT_NEAR(replayed, lower.value, 1e-10 * std::max(1.0, lower.value));
}

TEST(BpNormLower, zero_function) {
  auto g = cyclic_group(2);
  UniversalFamily fam = regular_family(g, 2.0);
  BpLower lower = bp_norm_lower(fam, bp_from_values(g, Eigen::VectorXcd::Zero(2)));
  EXPECT_FALSE(lower.unbounded);
  EXPECT_NEAR(lower.value, 0.0, 1e-12);
}

TEST(BpNormLower, detects_unbounded_pairings) {
  // Hand-assemble a family whose only block is the trivial representation.
  // Its lift kills mean-zero functions, so any u that pairs nontrivially
  // with them has no finite dual norm.
  auto g = cyclic_group(2);
  auto triv = trivial_rep(g, 2.0);
  UniversalFamily fam;
  fam.base = triv;
  fam.r_max = 2;
  fam.compute_reps = {triv};
  fam.inclusions = {Eigen::MatrixXcd::Identity(1, 1)};
  fam.assembled = triv;
  BpLower bad = bp_norm_lower(
      fam, bp_from_values(g, (Eigen::VectorXcd(2) << 1.0, -1.0).finished()));
  EXPECT_TRUE(bad.unbounded);
  EXPECT_GT(bad.violation.size(), 0);
  // The constant function annihilates the null ideal and stays bounded.
  BpLower ok = bp_norm_lower(
      fam, bp_from_values(g, (Eigen::VectorXcd(2) << 1.0, 1.0).finished()));
  EXPECT_FALSE(ok.unbounded);
  EXPECT_NEAR(ok.value, 1.0, 1e-6);
}

TEST(BpNormLower, fixed_ratio_is_monotone_in_the_family) {
  // Enlarging the family can only grow the denominator, so the certified
  // ratio at any fixed f can only shrink.
  auto g = cyclic_group(4);
  auto rep = left_regular(g, 2.0);
  UniversalFamily small = build_universal_family(rep, {constant(g, 1.0)}, 2);
  UniversalFamily large = build_universal_family(rep, delta_probes(g), 2);
  CounterRng rng(113, 27, 0);
  GroupFunction f = random_function(g, rng);
  BpElement u = bp_from_values(g, Eigen::VectorXcd::Unit(4, 1));
  double num = std::abs(pairing(f, u));
  double den_small = family_norm(small, f).lower;
  double den_large = family_norm(large, f).lower;
  ASSERT_GT(den_small, 1e-12);
  EXPECT_GE(den_large, den_small - 1e-12);
  EXPECT_LE(num / den_large, num / den_small + 1e-12);
}

TEST(BpNormUpper, realization_seeds_the_search) {
  auto g = cyclic_group(3);
  auto rep = left_regular(g, 2.0);
  CounterRng rng(127, 28, 0);
  Eigen::VectorXcd xi_c(3), eta_c(3);
  for (int i = 0; i < 3; ++i) {
    xi_c(i) = rng.next_cnormal();
    eta_c(i) = rng.next_cnormal();
  }
  SpaceVector xi(rep->space(), xi_c);
  DualVector eta(rep->space(), eta_c);
  BpElement u = coefficient_function(rep, xi, eta);
  BpUpper upper = bp_norm_upper(u, {rep});
  EXPECT_TRUE(upper.feasible);
  EXPECT_LE(upper.residual, 1e-8);
  EXPECT_LE(upper.value, vector_norm(xi) * dual_norm(eta) + 1e-6);
}

TEST(BpNormUpper, constant_function_costs_one) {
  auto g = cyclic_group(4);
  auto rep = left_regular(g, 2.0);
  BpElement u = bp_from_values(g, Eigen::VectorXcd::Ones(4));
  BpUpper upper = bp_norm_upper(u, {rep});
  ASSERT_TRUE(upper.feasible);
  EXPECT_NEAR(upper.value, 1.0, 2e-3);
}

TEST(BpNormUpper, infeasible_when_no_candidate_interpolates) {
  // The trivial representation only produces constant coefficient
  // functions; a point mass cannot be written through it.
  auto g = cyclic_group(2);
  BpElement u = bp_from_values(g, Eigen::VectorXcd::Unit(2, 0));
  EXPECT_THROW(bp_norm_upper(u, {trivial_rep(g, 2.0)}), InfeasibleError);
}

TEST(BpNormBracket, sandwiches_the_fourier_value) {
  auto g = cyclic_group(3);
  auto rep = left_regular(g, 2.0);
  UniversalFamily fam = regular_family(g, 2.0);
  CounterRng rng(131, 29, 0);
  SolverOptions opts;
  opts.starts = 8;
  opts.max_iterations = 200;
  for (int trial = 0; trial < 2; ++trial) {
    Eigen::VectorXcd values(3);
    for (int i = 0; i < 3; ++i) values(i) = rng.next_normal();
    BpElement u = bp_from_values(g, values);
    BpBracket bracket = bp_norm_bracket(fam, u, {rep}, opts);
    double oracle = fourier_oracle_p2(u);
    EXPECT_LE(bracket.lower.value, oracle + 1e-3) << "trial=" << trial;
    EXPECT_GE(bracket.upper.value, oracle - 1e-3) << "trial=" << trial;
    EXPECT_LE(bracket.lower.value, bracket.upper.value + 1e-3)
        << "trial=" << trial;
  }
}

TEST(BpMatrixNorm, single_function_levels) {
  auto g = cyclic_group(2);
  UniversalFamily fam = regular_family(g, 2.0);
  CounterRng rng(137, 30, 0);
  Eigen::VectorXcd values(2);
  for (int i = 0; i < 2; ++i) values(i) = rng.next_cnormal();
  BpElement u = bp_from_values(g, values);
  SolverOptions opts;
  opts.starts = 6;
  opts.max_iterations = 120;
  BpMatrixReport report = bp_matrix_norm(fam, {{u}}, 2, opts);
  ASSERT_EQ(report.levels.size(), 2u);
  EXPECT_EQ(report.levels[0].n, 1);
  EXPECT_EQ(report.levels[1].n, 2);
  // Corner embedding carries the level-1 witness upward, so the reported
  // value cannot drop between levels.
  EXPECT_GE(report.levels[1].estimate.lower,
            report.levels[0].estimate.lower - 1e-6);
  EXPECT_NEAR(report.best,
              std::max(report.levels[0].estimate.lower,
                       report.levels[1].estimate.lower),
              1e-12);
  BpLower direct = bp_norm_lower(fam, u, opts);
  EXPECT_NEAR(report.levels[0].estimate.lower, direct.value,
              5e-3 * std::max(1.0, direct.value));
}

TEST(BpMatrixNorm, zero_matrix) {
  auto g = cyclic_group(2);
  UniversalFamily fam = regular_family(g, 2.0);
  BpElement zero = bp_from_values(g, Eigen::VectorXcd::Zero(2));
  SolverOptions opts;
  opts.starts = 4;
  opts.max_iterations = 60;
  BpMatrixReport report = bp_matrix_norm(fam, {{zero, zero}, {zero, zero}}, 2,
                                         opts);
  EXPECT_NEAR(report.best, 0.0, 1e-12);
}

TEST(CbFunctional, levels_never_certify_a_violation) {
  auto g = cyclic_group(2);
  UniversalFamily fam = regular_family(g, 2.0);
  CounterRng rng(139, 31, 0);
  Eigen::VectorXcd values(2);
  for (int i = 0; i < 2; ++i) values(i) = rng.next_cnormal();
  SolverOptions opts;
  opts.starts = 4;
  opts.max_iterations = 60;
  CbReport report = cb_functional_check(fam, bp_from_values(g, values), 2,
                                        kGapGate, opts);
  ASSERT_EQ(report.levels.size(), 2u);
  ASSERT_EQ(report.outcomes.size(), 1u);
  EXPECT_FALSE(report.any_fail);
  EXPECT_NE(report.outcomes[0].verdict, Verdict::FAIL);
}

TEST(Duality, functional_induces_its_coefficient_function) {
  auto g = cyclic_group(2);
  UniversalFamily fam = regular_family(g, 2.0);
  CounterRng rng(149, 32, 0);
  Eigen::MatrixXcd phi(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) phi(i, j) = rng.next_cnormal();
  SolverOptions opts;
  opts.starts = 6;
  opts.max_iterations = 120;
  DualityReport report = duality_contractivity_check(fam, phi, opts);
  // u(x) collects the pairing of phi with the matrix of x.
  auto rep = fam.base;
  for (int x = 0; x < 2; ++x) {
    std::complex<double> expected =
        (rep->matrix(x).array() * phi.array()).sum();
    EXPECT_NEAR(std::abs(report.u.values(x) - expected), 0.0, 1e-12);
  }
  EXPECT_NE(report.outcome.verdict, Verdict::FAIL);
  EXPECT_LE(report.u_lower.value, report.phi_norm.upper + 1e-3);
}

TEST(BpElement, group_mismatch_guard) {
  auto g2 = cyclic_group(2);
  auto g3 = cyclic_group(3);
  BpElement u = bp_from_values(g2, Eigen::VectorXcd::Ones(2));
  BpElement v = bp_from_values(g3, Eigen::VectorXcd::Ones(3));
  EXPECT_THROW(pointwise_product(u, v), GroupMismatchError);
  EXPECT_THROW(pairing(delta(g3, 0), u), GroupMismatchError);
  EXPECT_THROW(bp_from_values(g2, Eigen::VectorXcd::Ones(3)),
               ShapeMismatchError);
}
