#include "pfa/opnorm.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>

using namespace pfa;

namespace {

Eigen::MatrixXcd random_matrix(int rows, int cols, CounterRng& rng) {
  Eigen::MatrixXcd A(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) A(i, j) = rng.next_cnormal();
  return A;
}

}  // namespace

TEST(OpNorm, rank_one_closed_value) {
  // u v^T maps x to u (v . x); its p->p norm is ||u||_p ||v||_{p'}. The
  // all-ones 2x2 gives 2^{1/p} 2^{1/p'} = 2 for every p.
  Eigen::MatrixXcd J = Eigen::MatrixXcd::Ones(2, 2);
  for (double p : {1.5, 2.0, 3.0}) {
    auto E = QSLpSpace::lp(2, p);
    NormEstimate est = opnorm(J, E, E);
    EXPECT_NEAR(est.lower, 2.0, 1e-8) << "p=" << p;
    EXPECT_GE(est.upper + 1e-12, est.lower);
  }
}

TEST(OpNorm, row_of_ones) {
  // A single row of m ones acting l_p^m -> l_p^1 has norm m^{1/p'}
  // (attained by the constant vector).
  const int m = 4;
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Ones(1, m);
  for (double p : {1.5, 2.0, 2.5}) {
    double expected = std::pow(static_cast<double>(m), (p - 1.0) / p);
    NormEstimate est = opnorm(A, QSLpSpace::lp(m, p), QSLpSpace::lp(1, p));
    EXPECT_NEAR(est.lower, expected, 1e-7) << "p=" << p;
  }
}

TEST(OpNorm, single_column_is_exact) {
  Eigen::MatrixXcd A(3, 1);
  A << 1.0, std::complex<double>(0.0, 2.0), -2.0;
  NormEstimate est = opnorm(A, QSLpSpace::lp(1, 3.0), QSLpSpace::lp(3, 3.0));
  EXPECT_NEAR(est.lower, std::pow(1.0 + 8.0 + 8.0, 1.0 / 3.0), 1e-14);
  EXPECT_EQ(est.upper_kind, UpperKind::exact);
  EXPECT_TRUE(est.upper_certified);
  EXPECT_EQ(est.lower, est.certified_upper);
}

TEST(OpNorm, generalized_permutation_closed_form) {
  // Signed scaled permutations act coordinatewise, so the norm is the
  // largest modulus for every p.
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(3, 3);
  A(0, 1) = std::complex<double>(0.0, 3.0);
  A(1, 2) = -0.5;
  A(2, 0) = 2.0;
  auto E = QSLpSpace::lp(3, 2.5);
  NormEstimate est = opnorm(A, E, E);
  EXPECT_EQ(est.method, NormMethod::closed_form);
  EXPECT_NEAR(est.lower, 3.0, 1e-14);
  EXPECT_NEAR(est.certified_upper, 3.0, 1e-14);
}

TEST(OpNorm, p2_matches_svd) {
  CounterRng rng(5, 50, 0);
  Eigen::MatrixXcd A = random_matrix(4, 4, rng);
  auto E = QSLpSpace::lp(4, 2.0);
  NormEstimate est = opnorm(A, E, E);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
  EXPECT_NEAR(est.lower, svd.singularValues()(0), 1e-10);
  EXPECT_EQ(est.method, NormMethod::svd);
  EXPECT_TRUE(est.upper_certified);
}

TEST(OpNorm, witness_reproduces_the_lower_bound) {
  CounterRng rng(9, 1, 0);
  for (double p : {1.5, 2.0, 3.0}) {
    Eigen::MatrixXcd A = random_matrix(3, 3, rng);
    auto E = QSLpSpace::lp(3, p);
    NormEstimate est = opnorm(A, E, E);
    ASSERT_GT(est.witness.size(), 0);
    double replayed = ratio_at(A, E, E, est.witness);
    EXPECT_NEAR(replayed, est.lower, 1e-10 * std::max(1.0, est.lower));
  }
}

TEST(OpNorm, boyd_agrees_with_bruteforce) {
  CounterRng rng(2024, 3, 0);
  for (double p : {1.5, 2.5}) {
    for (int trial = 0; trial < 3; ++trial) {
      Eigen::MatrixXcd A = random_matrix(3, 3, rng);
      auto E = QSLpSpace::lp(3, p);
      SolverOptions opts;
      opts.starts = 12;
      NormEstimate fast = opnorm_boyd(A, p, p, opts);
      NormEstimate slow = opnorm_bruteforce(A, E, E, 20, opts);
      EXPECT_NEAR(fast.lower, slow.lower, 1e-4 * std::max(1.0, slow.lower))
          << "p=" << p << " trial=" << trial;
    }
  }
}

TEST(OpNorm, bruteforce_upper_bracket) {
  CounterRng rng(7, 7, 0);
  Eigen::MatrixXcd A = random_matrix(2, 2, rng);
  auto E = QSLpSpace::lp(2, 1.5);
  NormEstimate est = opnorm_bruteforce(A, E, E, 40, {});
  EXPECT_LE(est.lower, est.upper + 1e-12);
  EXPECT_TRUE(std::isfinite(est.certified_upper));
  // The grid cushion is real: the certified upper must dominate the value
  // the multistart solver reaches.
  NormEstimate boyd = opnorm_boyd(A, 1.5, 1.5, {});
  EXPECT_LE(boyd.lower, est.certified_upper + 1e-6);
}

TEST(OpNorm, riesz_thorin_endpoints) {
  CounterRng rng(13, 4, 0);
  Eigen::MatrixXcd A = random_matrix(3, 4, rng);
  double max_col = 0.0, max_row = 0.0;
  for (int j = 0; j < 4; ++j)
    max_col = std::max(max_col, A.col(j).cwiseAbs().sum());
  for (int i = 0; i < 3; ++i)
    max_row = std::max(max_row, A.row(i).cwiseAbs().sum());
  EXPECT_NEAR(riesz_thorin_upper(A, 1.0), max_col, 1e-12);
  EXPECT_NEAR(riesz_thorin_upper(A, std::numeric_limits<double>::infinity()),
              max_row, 1e-12);
  // Interpolation dominates the true norm at p = 2.
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
  EXPECT_GE(riesz_thorin_upper(A, 2.0) + 1e-12, svd.singularValues()(0));
}

TEST(OpNorm, quotient_domain_projection_is_isometric) {
  // Quotient l_2^2 by span{(1,1)}: composing with the orthogonal projection
  // onto the complement is an isometry onto its image, so the norm is 1.
  Eigen::MatrixXcd S = Eigen::MatrixXcd::Identity(2, 2);
  Eigen::MatrixXcd N(2, 1);
  N << 1.0, 1.0;
  auto dom = QSLpSpace::quotient(S, N, 2.0);
  auto cod = QSLpSpace::lp(2, 2.0);
  Eigen::VectorXcd nhat = N.col(0) / N.col(0).norm();
  Eigen::MatrixXcd P =
      Eigen::MatrixXcd::Identity(2, 2) - nhat * nhat.adjoint();
  NormEstimate est = opnorm(P, dom, cod);
  EXPECT_NEAR(est.lower, 1.0, 1e-6);
}

TEST(OpNorm, subspace_domain_bruteforce_certifies) {
  // One-complex-dimensional domain: the search sphere is a circle, so the
  // dense grid path runs and certifies an upper bound.
  Eigen::MatrixXcd S(2, 1);
  S << 1.0, 1.0;
  auto dom = QSLpSpace::subspace(S, 3.0);
  auto cod = QSLpSpace::lp(2, 3.0);
  Eigen::MatrixXcd A(2, 1);
  A << 2.0, 0.0;
  NormEstimate est = opnorm(A, dom, cod);
  // ||c (2,0)||_3 / ||c (1,1)||_3 = 2 / 2^{1/3}.
  double expected = 2.0 / std::pow(2.0, 1.0 / 3.0);
  EXPECT_NEAR(est.lower, expected, 1e-9);
}

TEST(OpNorm, directsum_takes_the_block_max) {
  Eigen::MatrixXcd B1(1, 1), B2(1, 1);
  B1 << 2.0;
  B2 << -3.0;
  auto E1 = QSLpSpace::lp(1, 2.0);
  DirectSumNorm sum = directsum_opnorm({B1, B2}, {E1, E1}, {E1, E1}, {});
  EXPECT_NEAR(sum.estimate.lower, 3.0, 1e-12);
  EXPECT_EQ(sum.domain->coord_dim(), 2);
  // The witness lives in direct-sum coordinates and replays the max through
  // the assembled block-diagonal matrix.
  Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(2, 2);
  block(0, 0) = 2.0;
  block(1, 1) = -3.0;
  double replayed = ratio_at(block, sum.domain, sum.codomain,
                             sum.estimate.witness);
  EXPECT_NEAR(replayed, 3.0, 1e-12);
}

TEST(OpNorm, mixed_scalar_rectangular) {
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Ones(2, 3);
  NormEstimate est = mixed_scalar_norm(A, 2.0, 2.0);
  EXPECT_NEAR(est.lower, std::sqrt(6.0), 1e-10);
}

TEST(OpNorm, zero_matrix) {
  auto E = QSLpSpace::lp(2, 2.5);
  NormEstimate est = opnorm(Eigen::MatrixXcd::Zero(2, 2), E, E);
  EXPECT_NEAR(est.lower, 0.0, 1e-14);
  EXPECT_LE(est.lower, est.upper);
}

TEST(OpNorm, bruteforce_dimension_guard) {
  auto E = QSLpSpace::lp(4, 1.5);
  CounterRng rng(1, 1, 0);
  Eigen::MatrixXcd A = random_matrix(4, 4, rng);
  EXPECT_THROW(opnorm_bruteforce(A, E, E, 10, {}), DimensionTooLargeError);
}

TEST(OpNorm, shape_guard) {
  auto E2 = QSLpSpace::lp(2, 2.0);
  auto E3 = QSLpSpace::lp(3, 2.0);
  EXPECT_THROW(opnorm(Eigen::MatrixXcd::Zero(2, 2), E3, E2),
               ShapeMismatchError);
}
