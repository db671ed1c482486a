#include "pfa/qslp_space.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>

using namespace pfa;

namespace {

// Independent check for min over complex t of ||a + n t||_p: dense grid over
// re/im of t around the least-squares start, three shrinking refinements.
double grid_min_one_translation(const Eigen::VectorXcd& a,
                                const Eigen::VectorXcd& n, double p) {
  std::complex<double> center = -n.dot(a) / n.squaredNorm();  // conjugates n
  double radius = 2.0 * (detail::lp_norm(a, p) / std::max(n.norm(), 1e-30) + 1.0);
  double best = detail::lp_norm(a + n * center, p);
  for (int round = 0; round < 4; ++round) {
    std::complex<double> best_t = center;
    const int steps = 40;
    for (int i = -steps; i <= steps; ++i) {
      for (int j = -steps; j <= steps; ++j) {
        std::complex<double> t =
            center + std::complex<double>(radius * i / steps, radius * j / steps);
        double v = detail::lp_norm(a + n * t, p);
        if (v < best) {
          best = v;
          best_t = t;
        }
      }
    }
    center = best_t;
    radius /= steps / 2.0;
  }
  return best;
}

}  // namespace

TEST(LpNorm, known_values) {
  Eigen::VectorXcd v(2);
  v << 3.0, 4.0;
  EXPECT_NEAR(detail::lp_norm(v, 2.0), 5.0, 1e-14);
  Eigen::VectorXcd w(3);
  w << 1.0, 1.0, 1.0;
  EXPECT_NEAR(detail::lp_norm(w, 3.0), std::pow(3.0, 1.0 / 3.0), 1e-14);
  Eigen::VectorXcd z(2);
  z << std::complex<double>(0.0, 2.0), -2.0;
  EXPECT_NEAR(detail::lp_norm(z, 1.5), std::pow(2.0 * std::pow(2.0, 1.5), 1.0 / 1.5),
              1e-14);
}

TEST(QSLpSpace, exponent_must_be_interior) {
  EXPECT_THROW(QSLpSpace::lp(2, 1.0), ConfigError);
  EXPECT_THROW(QSLpSpace::lp(2, 0.5), ConfigError);
  EXPECT_THROW(QSLpSpace::lp(2, std::numeric_limits<double>::infinity()),
               ConfigError);
  auto ok = QSLpSpace::lp(2, 1.0 + 1e-9);
  EXPECT_GT(ok->dual_p(), 1e8);
}

TEST(QSLpSpace, plain_vector_norm) {
  auto E = QSLpSpace::lp(3, 2.5);
  Eigen::VectorXcd v(3);
  v << 1.0, std::complex<double>(0.0, -2.0), 0.5;
  EXPECT_NEAR(vector_norm(SpaceVector(E, v)), detail::lp_norm(v, 2.5), 1e-14);
}

TEST(QSLpSpace, subspace_norm_is_ambient_norm_of_the_image) {
  Eigen::MatrixXcd S(3, 2);
  S << 1.0, 0.0, 1.0, 1.0, 0.0, std::complex<double>(0.0, 1.0);
  auto E = QSLpSpace::subspace(S, 3.0);
  Eigen::VectorXcd c(2);
  c << 2.0, -1.0;
  EXPECT_NEAR(vector_norm(SpaceVector(E, c)), detail::lp_norm(S * c, 3.0), 1e-14);
}

TEST(QSLpSpace, quotient_norm_p2_is_projection_length) {
  // At p = 2 the best translation is the orthogonal projection onto the
  // null direction, so the coset norm is the length of the residual.
  Eigen::MatrixXcd S = Eigen::MatrixXcd::Identity(3, 3);
  Eigen::MatrixXcd N(3, 1);
  N << 1.0, 1.0, 0.0;
  auto E = QSLpSpace::quotient(S, N, 2.0);
  Eigen::VectorXcd a(3);
  a << 1.0, 0.0, 2.0;
  Eigen::VectorXcd nhat = N.col(0) / N.col(0).norm();
  Eigen::VectorXcd resid = a - nhat * nhat.dot(a);
  EXPECT_NEAR(vector_norm(SpaceVector(E, a)), resid.norm(), 1e-10);
}

TEST(QSLpSpace, quotient_norm_matches_grid_search) {
  Eigen::MatrixXcd S = Eigen::MatrixXcd::Identity(2, 2);
  Eigen::MatrixXcd N(2, 1);
  N << 1.0, 1.0;
  for (double p : {1.5, 2.0, 3.0}) {
    auto E = QSLpSpace::quotient(S, N, p);
    Eigen::VectorXcd a(2);
    a << 1.0, std::complex<double>(0.25, 0.5);
    double expected = grid_min_one_translation(a, N.col(0), p);
    EXPECT_NEAR(vector_norm(SpaceVector(E, a)), expected, 2e-6) << "p=" << p;
  }
}

TEST(QSLpSpace, minimize_lp_affine_agrees_with_grid) {
  CounterRng rng(101, 7, 0);
  for (double p : {1.5, 2.0, 2.5, 4.0}) {
    for (int trial = 0; trial < 4; ++trial) {
      Eigen::VectorXcd a(3);
      Eigen::MatrixXcd M(3, 1);
      for (int i = 0; i < 3; ++i) {
        a(i) = rng.next_cnormal();
        M(i, 0) = rng.next_cnormal();
      }
      auto res = detail::minimize_lp_affine(a, M, p);
      double expected = grid_min_one_translation(a, M.col(0), p);
      EXPECT_NEAR(res.value, expected, 5e-6 * std::max(1.0, expected))
          << "p=" << p << " trial=" << trial;
    }
  }
}

TEST(QSLpSpace, minimize_lp_affine_empty_translation) {
  Eigen::VectorXcd a(2);
  a << 3.0, -4.0;
  auto res = detail::minimize_lp_affine(a, Eigen::MatrixXcd(2, 0), 2.0);
  EXPECT_NEAR(res.value, 5.0, 1e-14);
}

TEST(DualVector, plain_dual_norm_is_conjugate_exponent) {
  auto E = QSLpSpace::lp(3, 3.0);
  Eigen::VectorXcd w(3);
  w << 1.0, -2.0, std::complex<double>(0.0, 1.0);
  EXPECT_NEAR(dual_norm(DualVector(E, w)), detail::lp_norm(w, 1.5), 1e-12);
}

TEST(DualVector, subspace_dual_divides_out_the_annihilator) {
  // Functionals on span{e1} inside l_p^2 only see the first coordinate; the
  // annihilator span{e2} absorbs the rest.
  Eigen::MatrixXcd S(2, 1);
  S << 1.0, 0.0;
  for (double p : {1.5, 2.0, 3.0}) {
    auto E = QSLpSpace::subspace(S, p);
    Eigen::VectorXcd w(2);
    w << 3.0, 5.0;
    EXPECT_NEAR(dual_norm(DualVector(E, w)), 3.0, 1e-9) << "p=" << p;
  }
}

TEST(DualVector, pairing_is_bilinear_not_sesquilinear) {
  // <v, w> = sum (Sv)_i w_i with no conjugation, so pairing i with i gives
  // -1 rather than +1.
  auto E = QSLpSpace::lp(1, 2.0);
  SpaceVector v(E, (Eigen::VectorXcd(1) << std::complex<double>(0.0, 1.0)).finished());
  DualVector w(E, (Eigen::VectorXcd(1) << std::complex<double>(0.0, 1.0)).finished());
  std::complex<double> pr = dual_pair(v, w);
  EXPECT_NEAR(std::abs(pr - std::complex<double>(-1.0, 0.0)), 0.0, 1e-15);
}

TEST(DualVector, pairing_uses_the_ambient_image) {
  Eigen::MatrixXcd S(3, 2);
  S << 1.0, 0.0, 0.0, 1.0, 1.0, 1.0;
  auto E = QSLpSpace::subspace(S, 2.0);
  Eigen::VectorXcd c(2), w(3);
  c << 1.0, std::complex<double>(2.0, 1.0);
  w << 1.0, 1.0, std::complex<double>(0.0, 3.0);
  std::complex<double> expected = (S * c).cwiseProduct(w).sum();
  EXPECT_NEAR(std::abs(dual_pair(SpaceVector(E, c), DualVector(E, w)) - expected),
              0.0, 1e-14);
}

TEST(QSLpSpace, direct_sum_concatenates) {
  auto A = QSLpSpace::lp(2, 2.5);
  auto B = QSLpSpace::lp(3, 2.5);
  auto S = direct_sum_space({A, B});
  EXPECT_EQ(S->ambient_dim(), 5);
  EXPECT_EQ(S->coord_dim(), 5);
  Eigen::VectorXcd v(5);
  v << 1.0, 2.0, 3.0, 4.0, 5.0;
  EXPECT_NEAR(vector_norm(SpaceVector(S, v)), detail::lp_norm(v, 2.5), 1e-14);
  EXPECT_THROW(direct_sum_space({A, QSLpSpace::lp(2, 3.0)}),
               ExponentMismatchError);
}

TEST(QSLpSpace, amplify_blocks_component_first) {
  Eigen::MatrixXcd S(2, 1);
  S << 1.0, 2.0;
  auto E = QSLpSpace::subspace(S, 2.0);
  auto E2 = amplify_space(E, 3);
  EXPECT_EQ(E2->ambient_dim(), 6);
  EXPECT_EQ(E2->coord_dim(), 3);
  Eigen::VectorXcd c(3);
  c << 1.0, 0.0, 0.0;
  Eigen::VectorXcd amb = E2->ambient(c);
  EXPECT_NEAR(std::abs(amb(0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(amb(1) - 2.0), 0.0, 1e-15);
  EXPECT_NEAR(amb.tail(4).norm(), 0.0, 1e-15);
}

TEST(QSLpSpace, quotient_validation) {
  Eigen::MatrixXcd S(2, 1);
  S << 1.0, 0.0;
  Eigen::MatrixXcd N(2, 1);
  N << 0.0, 1.0;  // outside span(S)
  EXPECT_THROW(QSLpSpace::quotient(S, N, 2.0), ShapeMismatchError);
  Eigen::MatrixXcd dep(2, 2);
  dep << 1.0, 2.0, 0.0, 0.0;  // dependent columns
  EXPECT_THROW(QSLpSpace::subspace(dep, 2.0), ShapeMismatchError);
}

TEST(QSLpSpace, hash_and_identity) {
  auto a = QSLpSpace::lp(3, 2.0);
  auto b = QSLpSpace::lp(3, 2.0);
  auto c = QSLpSpace::lp(3, 2.5);
  EXPECT_TRUE(a->same_as(*b));
  EXPECT_EQ(a->hash(), b->hash());
  EXPECT_FALSE(a->same_as(*c));
}
