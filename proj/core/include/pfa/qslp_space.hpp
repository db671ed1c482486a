#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "pfa/errors.hpp"
#include "pfa/rng.hpp"

namespace pfa {

class QSLpSpace;
using SpacePtr = std::shared_ptr<const QSLpSpace>;

// A quotient of a subspace of l_p^m: span(S) / span(N), carrying the norm
// inherited from l_p^m on cosets. Vectors are addressed by coordinates in
// the columns of S. Plain l_p^m is the special case S = I, N empty.
class QSLpSpace {
 public:
  // Plain l_p^n.
  static SpacePtr lp(int n, double p);
  // span(S) inside l_p^m with the subspace norm (no quotient).
  static SpacePtr subspace(Eigen::MatrixXcd S, double p);
  // span(S)/span(N). Columns of N must lie in span(S) (checked, 1e-10).
  static SpacePtr quotient(Eigen::MatrixXcd S, Eigen::MatrixXcd N, double p);

  int ambient_dim() const { return static_cast<int>(S_.rows()); }
  int coord_dim() const { return static_cast<int>(S_.cols()); }
  int null_dim() const { return static_cast<int>(N_.cols()); }
  int dim() const { return coord_dim() - null_dim(); }
  double p() const { return p_; }
  double dual_p() const { return p_ / (p_ - 1.0); }
  bool is_plain() const { return plain_; }
  bool has_null() const { return N_.cols() > 0; }

  const Eigen::MatrixXcd& basis() const { return S_; }
  const Eigen::MatrixXcd& null_basis() const { return N_; }
  // Basis of the annihilator of span(S) under the bilinear pairing.
  const Eigen::MatrixXcd& basis_annihilator() const { return S_perp_; }

  Eigen::VectorXcd ambient(const Eigen::VectorXcd& coords) const {
    return plain_ ? coords : Eigen::VectorXcd(S_ * coords);
  }

  bool same_as(const QSLpSpace& other) const;
  std::uint64_t hash() const { return hash_; }

 private:
  QSLpSpace() = default;
  static SpacePtr finish(Eigen::MatrixXcd S, Eigen::MatrixXcd N, double p);

  double p_ = 2.0;
  bool plain_ = false;
  Eigen::MatrixXcd S_;       // m x k, independent columns
  Eigen::MatrixXcd N_;       // m x j, columns inside span(S)
  Eigen::MatrixXcd S_perp_;  // m x (m - k), kernel of S^T
  std::uint64_t hash_ = 0;
};

struct SpaceVector {
  SpacePtr space;
  Eigen::VectorXcd coords;  // length coord_dim

  SpaceVector() = default;
  SpaceVector(SpacePtr s, Eigen::VectorXcd c);
};

// A functional on a QSLpSpace, stored as an ambient dual vector that
// annihilates span(N); the pairing with vectors is bilinear (no conjugate).
struct DualVector {
  SpacePtr space;
  Eigen::VectorXcd functional;  // length ambient_dim

  DualVector() = default;
  DualVector(SpacePtr s, Eigen::VectorXcd w);
};

// Result of an iterative norm computation. `value` is always the best value
// found; `converged` is the certificate that the gradient dropped below the
// requested tolerance before the iteration budget ran out.
struct QuotientSolveResult {
  double value = 0.0;
  bool converged = true;
  int iterations = 0;
  double grad_norm = 0.0;
  Eigen::VectorXcd minimizer;  // optimal translation coefficients
};

struct QuotientSolveOptions {
  double grad_tolerance = 1e-9;
  int max_iterations = 10000;
};

namespace detail {
// min over t of || a + M t ||_p for p in (1, inf). Closed form when M has no
// columns or p == 2; damped IRLS otherwise, with a gradient-descent fallback
// for p < 2 when IRLS stalls.
QuotientSolveResult minimize_lp_affine(const Eigen::VectorXcd& a,
                                       const Eigen::MatrixXcd& M, double p,
                                       const QuotientSolveOptions& opts = {});
double lp_norm(const Eigen::VectorXcd& v, double p);
}  // namespace detail

double vector_norm(const SpaceVector& v);
QuotientSolveResult vector_norm_detail(const SpaceVector& v,
                                       const QuotientSolveOptions& opts = {});

// Norm of the functional on the space: quotient over the annihilator of
// span(S) in l_{p'}^m.
double dual_norm(const DualVector& w);
QuotientSolveResult dual_norm_detail(const DualVector& w,
                                     const QuotientSolveOptions& opts = {});

// l_p direct sum. All summands must share the exponent.
SpacePtr direct_sum_space(const std::vector<SpacePtr>& parts);

// n-fold direct sum of the same space, coordinates blocked component-first.
SpacePtr amplify_space(const SpacePtr& space, int n);

// Bilinear pairing sum_i (S v)_i w_i.
std::complex<double> dual_pair(const SpaceVector& v, const DualVector& w);

void require_same_space(const SpacePtr& a, const SpacePtr& b);

}  // namespace pfa
