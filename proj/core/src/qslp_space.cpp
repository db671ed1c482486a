#include "pfa/qslp_space.hpp"

#include <cmath>
#include <utility>

namespace pfa {
namespace detail {

double lp_norm(const Eigen::VectorXcd& v, double p) {
  if (v.size() == 0) return 0.0;
  // Scale out the largest modulus to avoid overflow for large p.
  double mx = v.cwiseAbs().maxCoeff();
  if (mx == 0.0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    acc += std::pow(std::abs(v(i)) / mx, p);
  return mx * std::pow(acc, 1.0 / p);
}

namespace {

// psi_p(r)_i = |r_i|^{p-2} r_i, the integrand of the l_p norm gradient.
Eigen::VectorXcd psi(const Eigen::VectorXcd& r, double p) {
  Eigen::VectorXcd out(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    double m = std::abs(r(i));
    out(i) = m == 0.0 ? std::complex<double>(0.0) : std::pow(m, p - 2.0) * r(i);
  }
  return out;
}

// Real gradient of t -> ||a + M t||_p, reported as a complex vector whose
// real/imaginary parts are the partials in Re t / Im t.
Eigen::VectorXcd norm_gradient(const Eigen::MatrixXcd& M,
                               const Eigen::VectorXcd& r, double p,
                               double value) {
  if (value == 0.0) return Eigen::VectorXcd::Zero(M.cols());
  return std::pow(value, 1.0 - p) * (M.adjoint() * psi(r, p));
}

}  // namespace

QuotientSolveResult minimize_lp_affine(const Eigen::VectorXcd& a,
                                       const Eigen::MatrixXcd& M, double p,
                                       const QuotientSolveOptions& opts) {
  QuotientSolveResult res;
  res.minimizer = Eigen::VectorXcd::Zero(M.cols());
  if (M.cols() == 0) {
    res.value = lp_norm(a, p);
    return res;
  }

  const double scale = std::max(lp_norm(a, p), 1e-30);

  // Least squares start; exact answer when p == 2.
  Eigen::VectorXcd t = M.completeOrthogonalDecomposition().solve(-a);
  Eigen::VectorXcd r = a + M * t;
  double value = lp_norm(r, p);
  if (p == 2.0) {
    res.value = value;
    res.minimizer = t;
    res.iterations = 1;
    return res;
  }

  const double floor_eps = 1e-18 * scale * scale;
  double eps = 1e-4 * scale * scale;
  int it = 0;
  int stall = 0;
  double best_value = value;
  Eigen::VectorXcd best_t = t;

  auto grad_ok = [&](double g, double v) {
    return g <= opts.grad_tolerance * std::max(1.0, v);
  };

  double gnorm = norm_gradient(M, r, p, value).norm();
  while (it < opts.max_iterations) {
    if (value <= 1e-13 * scale) break;  // vector is (numerically) in span(M)
    if (grad_ok(gnorm, value) && eps <= floor_eps * 1.0000001) break;

    // Weighted least squares step on the eps-smoothed objective.
    Eigen::VectorXd w(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i)
      w(i) = std::pow(std::norm(r(i)) + eps, (p - 2.0) / 2.0);
    Eigen::MatrixXcd H = M.adjoint() * w.asDiagonal() * M;
    H.diagonal().array() += 1e-14 * (H.trace().real() / static_cast<double>(H.rows()) + 1e-30);
    Eigen::VectorXcd t_star = Eigen::LDLT<Eigen::MatrixXcd>(H).solve(
        -(M.adjoint() * (w.asDiagonal() * a)));

    // Damping: walk toward the weighted solution until the true objective
    // improves; IRLS overshoots for p > 2 without this.
    double step = 1.0;
    bool improved = false;
    for (int h = 0; h < 40; ++h) {
      Eigen::VectorXcd t_try = t + step * (t_star - t);
      Eigen::VectorXcd r_try = a + M * t_try;
      double v_try = lp_norm(r_try, p);
      ++it;
      if (v_try < value - 1e-16 * scale) {
        t = t_try;
        r = r_try;
        value = v_try;
        improved = true;
        break;
      }
      step *= 0.5;
      if (it >= opts.max_iterations) break;
    }
    if (value < best_value) {
      best_value = value;
      best_t = t;
    }
    gnorm = norm_gradient(M, r, p, value).norm();
    if (!improved) {
      if (eps > floor_eps) {
        eps = std::max(eps * 1e-2, floor_eps);
        stall = 0;
      } else {
        ++stall;
        if (stall >= 3) break;
      }
    } else if (grad_ok(gnorm, value)) {
      eps = std::max(eps * 1e-2, floor_eps);
    }
  }

  // Fallback for p < 2: plain gradient descent with a diminishing step,
  // started from the best IRLS point. Only runs when the certificate is
  // still missing and budget remains.
  if (p < 2.0 && !grad_ok(gnorm, value) && value > 1e-13 * scale) {
    t = best_t;
    r = a + M * t;
    value = lp_norm(r, p);
    int k = 0;
    while (it < opts.max_iterations) {
      Eigen::VectorXcd g = norm_gradient(M, r, p, value);
      gnorm = g.norm();
      if (grad_ok(gnorm, value) || value <= 1e-13 * scale) break;
      double alpha = 0.5 * value / (gnorm * gnorm + 1e-300);
      alpha /= std::sqrt(1.0 + static_cast<double>(k));
      Eigen::VectorXcd t_try = t - alpha * g;
      Eigen::VectorXcd r_try = a + M * t_try;
      double v_try = lp_norm(r_try, p);
      ++it;
      ++k;
      if (v_try < value) {
        t = t_try;
        r = r_try;
        value = v_try;
        if (value < best_value) {
          best_value = value;
          best_t = t;
        }
      }
    }
  }

  if (value > best_value) {
    value = best_value;
    t = best_t;
    r = a + M * t;
  }
  gnorm = norm_gradient(M, r, p, value).norm();
  res.value = value;
  res.minimizer = t;
  res.iterations = it;
  res.grad_norm = gnorm;
  res.converged =
      value <= 1e-13 * scale || grad_ok(gnorm, value);
  return res;
}

}  // namespace detail

SpacePtr QSLpSpace::finish(Eigen::MatrixXcd S, Eigen::MatrixXcd N, double p) {
  if (p <= 1.0 || !std::isfinite(p))
    throw ConfigError("p must lie in (1, infinity)");
  const auto m = S.rows();
  const auto k = S.cols();
  if (m == 0 || k == 0) throw ShapeMismatchError("space needs at least one dimension");
  if (k > m) throw ShapeMismatchError("more basis columns than ambient dimensions");

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(S);
  cod.setThreshold(1e-10);
  if (cod.rank() < k)
    throw ShapeMismatchError("basis columns are not independent");

  if (N.size() == 0) N.resize(m, 0);
  if (N.cols() > 0) {
    if (N.rows() != m)
      throw ShapeMismatchError("null basis has wrong ambient dimension");
    // Columns of N must lie in span(S).
    Eigen::MatrixXcd coeff = cod.solve(N);
    double resid = (S * coeff - N).cwiseAbs().maxCoeff();
    double ref = std::max(1.0, N.cwiseAbs().maxCoeff());
    if (resid > 1e-10 * ref)
      throw ShapeMismatchError("null basis leaves the subspace span");
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> ncod(N);
    ncod.setThreshold(1e-10);
    if (ncod.rank() < N.cols())
      throw ShapeMismatchError("null basis columns are not independent");
    if (N.cols() > k)
      throw ShapeMismatchError("null space larger than the subspace");
  }

  auto sp = std::shared_ptr<QSLpSpace>(new QSLpSpace());
  sp->p_ = p;
  sp->plain_ = (k == m) && N.cols() == 0 &&
               S.isApprox(Eigen::MatrixXcd::Identity(m, m), 0.0);
  sp->S_ = std::move(S);
  sp->N_ = std::move(N);
  if (sp->plain_) {
    sp->S_perp_.resize(m, 0);
  } else {
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(sp->S_.transpose());
    lu.setThreshold(1e-12);
    sp->S_perp_ = lu.kernel();
    if (lu.rank() == m) sp->S_perp_.resize(m, 0);  // kernel() pads rank-full case
  }

  Hasher h;
  h.i32(static_cast<int>(m)).i32(static_cast<int>(k)).i32(static_cast<int>(sp->N_.cols())).f64(p);
  for (Eigen::Index j = 0; j < sp->S_.cols(); ++j)
    for (Eigen::Index i = 0; i < sp->S_.rows(); ++i) h.c128(sp->S_(i, j));
  for (Eigen::Index j = 0; j < sp->N_.cols(); ++j)
    for (Eigen::Index i = 0; i < sp->N_.rows(); ++i) h.c128(sp->N_(i, j));
  sp->hash_ = h.digest();
  return sp;
}

SpacePtr QSLpSpace::lp(int n, double p) {
  return finish(Eigen::MatrixXcd::Identity(n, n), Eigen::MatrixXcd(), p);
}

SpacePtr QSLpSpace::subspace(Eigen::MatrixXcd S, double p) {
  return finish(std::move(S), Eigen::MatrixXcd(), p);
}

SpacePtr QSLpSpace::quotient(Eigen::MatrixXcd S, Eigen::MatrixXcd N, double p) {
  return finish(std::move(S), std::move(N), p);
}

bool QSLpSpace::same_as(const QSLpSpace& other) const {
  if (this == &other) return true;
  return p_ == other.p_ && S_.rows() == other.S_.rows() &&
         S_.cols() == other.S_.cols() && N_.cols() == other.N_.cols() &&
         S_ == other.S_ && N_ == other.N_;
}

SpaceVector::SpaceVector(SpacePtr s, Eigen::VectorXcd c)
    : space(std::move(s)), coords(std::move(c)) {
  if (!space) throw SpaceMismatchError("vector without a space");
  if (coords.size() != space->coord_dim())
    throw ShapeMismatchError("coordinate count does not match space");
}

DualVector::DualVector(SpacePtr s, Eigen::VectorXcd w)
    : space(std::move(s)), functional(std::move(w)) {
  if (!space) throw SpaceMismatchError("functional without a space");
  if (functional.size() != space->ambient_dim())
    throw ShapeMismatchError("functional length does not match ambient dimension");
  if (space->has_null()) {
    double resid = (space->null_basis().transpose() * functional).cwiseAbs().maxCoeff();
    double ref = std::max(1.0, functional.cwiseAbs().maxCoeff());
    if (resid > 1e-8 * ref)
      throw SpaceMismatchError("functional does not annihilate the null space");
  }
}

double vector_norm(const SpaceVector& v) { return vector_norm_detail(v).value; }

QuotientSolveResult vector_norm_detail(const SpaceVector& v,
                                       const QuotientSolveOptions& opts) {
  const QSLpSpace& E = *v.space;
  if (!E.has_null()) {
    QuotientSolveResult res;
    res.value = detail::lp_norm(E.ambient(v.coords), E.p());
    res.minimizer = Eigen::VectorXcd::Zero(0);
    return res;
  }
  return detail::minimize_lp_affine(E.ambient(v.coords), E.null_basis(), E.p(),
                                    opts);
}

double dual_norm(const DualVector& w) { return dual_norm_detail(w).value; }

QuotientSolveResult dual_norm_detail(const DualVector& w,
                                     const QuotientSolveOptions& opts) {
  const QSLpSpace& E = *w.space;
  const double q = E.dual_p();
  if (E.is_plain()) {
    QuotientSolveResult res;
    res.value = detail::lp_norm(w.functional, q);
    return res;
  }
  return detail::minimize_lp_affine(w.functional, E.basis_annihilator(), q,
                                    opts);
}

SpacePtr direct_sum_space(const std::vector<SpacePtr>& parts) {
  if (parts.empty()) throw ShapeMismatchError("direct sum of zero spaces");
  const double p = parts.front()->p();
  int m = 0, k = 0, j = 0;
  bool all_plain = true;
  for (const auto& part : parts) {
    if (!part) throw SpaceMismatchError("null space in direct sum");
    if (part->p() != p)
      throw ExponentMismatchError("direct sum requires matching exponents");
    m += part->ambient_dim();
    k += part->coord_dim();
    j += part->null_dim();
    all_plain = all_plain && part->is_plain();
  }
  if (all_plain) return QSLpSpace::lp(m, p);

  Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(m, k);
  Eigen::MatrixXcd N = Eigen::MatrixXcd::Zero(m, j);
  int ro = 0, co = 0, no = 0;
  for (const auto& part : parts) {
    S.block(ro, co, part->ambient_dim(), part->coord_dim()) = part->basis();
    if (part->null_dim() > 0)
      N.block(ro, no, part->ambient_dim(), part->null_dim()) = part->null_basis();
    ro += part->ambient_dim();
    co += part->coord_dim();
    no += part->null_dim();
  }
  if (j == 0) N.resize(m, 0);
  return QSLpSpace::quotient(std::move(S), std::move(N), p);
}

SpacePtr amplify_space(const SpacePtr& space, int n) {
  if (n <= 0) throw ShapeMismatchError("amplification order must be positive");
  return direct_sum_space(std::vector<SpacePtr>(static_cast<std::size_t>(n), space));
}

std::complex<double> dual_pair(const SpaceVector& v, const DualVector& w) {
  require_same_space(v.space, w.space);
  Eigen::VectorXcd amb = v.space->ambient(v.coords);
  return (amb.transpose() * w.functional)(0);
}

void require_same_space(const SpacePtr& a, const SpacePtr& b) {
  if (!a || !b) throw SpaceMismatchError("missing space");
  if (a.get() == b.get()) return;
  if (!a->same_as(*b)) throw SpaceMismatchError("vectors live on different spaces");
}

}  // namespace pfa
