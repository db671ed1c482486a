#include "pfa/bp_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

namespace pfa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::complex<double> pairing_sum(const Eigen::VectorXcd& a,
                                 const Eigen::VectorXcd& b) {
  return (a.array() * b.array()).sum();
}

// |v|^{r-2} v componentwise, 0 at 0.
Eigen::VectorXcd psi_vec(const Eigen::VectorXcd& v, double r) {
  Eigen::VectorXcd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    double a = std::abs(v(i));
    out(i) = a == 0.0 ? std::complex<double>(0.0)
                      : std::pow(a, r - 2.0) * v(i);
  }
  return out;
}

GroupFunctionMatrix unflatten(const GroupPtr& group, int n,
                              const Eigen::VectorXcd& f) {
  GroupFunctionMatrix F;
  F.group = group;
  F.rows = F.cols = n;
  const int ord = group->order();
  F.entries.reserve(static_cast<std::size_t>(n) * n);
  for (int st = 0; st < n * n; ++st)
    F.entries.push_back(f.segment(static_cast<Eigen::Index>(st) * ord, ord));
  return F;
}

struct EvalResult {
  double value = 0.0;
  Eigen::VectorXcd grad;  // ascent direction with respect to conj(f)
};

using EvalFn = std::function<EvalResult(const Eigen::VectorXcd&, bool)>;

// Block-diagonal denominator ||[Pi(f_st)]||: max over the family's compute
// blocks, with a Danskin gradient through the winning block's witness.
struct FamilyDenominator {
  const UniversalFamily* family = nullptr;
  int n = 1;
  std::vector<SpacePtr> amp_spaces;
  SolverOptions inner;

  FamilyDenominator(const UniversalFamily& fam, int level,
                    const SolverOptions& opts)
      : family(&fam), n(level) {
    inner = opts;
    // Steering evaluations only need coarse values; the winner is re-solved
    // at the caller's full budget before anything is reported.
    inner.starts = std::min(opts.starts, 4);
    inner.max_iterations = std::min(opts.max_iterations, 100);
    inner.bruteforce_resolution = std::min(opts.bruteforce_resolution, 6);
    inner.polish_count = std::min(opts.polish_count, 2);
    amp_spaces.reserve(fam.compute_reps.size());
    for (const auto& rep : fam.compute_reps)
      amp_spaces.push_back(n == 1 ? rep->space()
                                  : amplify_space(rep->space(), n));
  }

  EvalResult operator()(const Eigen::VectorXcd& fvec, bool want_grad) const {
    GroupFunctionMatrix F = unflatten(family->base->group(), n, fvec);
    double best = -1.0;
    int winner = -1;
    NormEstimate best_est;
    for (std::size_t i = 0; i < family->compute_reps.size(); ++i) {
      Eigen::MatrixXcd B = amplified_lift(family->compute_reps[i], F);
      NormEstimate est = opnorm(B, amp_spaces[i], amp_spaces[i], inner);
      if (est.lower > best) {
        best = est.lower;
        winner = static_cast<int>(i);
        best_est = est;
      }
    }
    EvalResult out;
    out.value = std::max(best, 0.0);
    if (!want_grad || winner < 0 || best <= 0.0) return out;

    const RepPtr& rep = family->compute_reps[static_cast<std::size_t>(winner)];
    const SpacePtr& amp = amp_spaces[static_cast<std::size_t>(winner)];
    const int k = rep->dim();
    const int ord = family->base->group()->order();
    const double q = amp->p();

    Eigen::VectorXcd w = best_est.witness;
    double wnorm = vector_norm(SpaceVector{amp, w});
    if (wnorm <= 0.0) return out;
    Eigen::MatrixXcd B = amplified_lift(rep, F);
    Eigen::VectorXcd amb = amp->ambient(B * w);
    double ambn = detail::lp_norm(amb, q);
    if (ambn <= 0.0) return out;
    Eigen::VectorXcd psi = psi_vec(amb, q);

    // Columns of the linearization: f_{st}(x) moves e_s (x) S (M(x) w_t).
    const Eigen::MatrixXcd& S = rep->space()->basis();
    const Eigen::Index m = S.rows();
    std::vector<Eigen::VectorXcd> sp(static_cast<std::size_t>(ord) * n);
    for (int x = 0; x < ord; ++x)
      for (int t = 0; t < n; ++t)
        sp[static_cast<std::size_t>(x) * n + t] =
            S * (rep->matrix(x) * w.segment(static_cast<Eigen::Index>(t) * k, k));

    const double pref = std::pow(ambn, 1.0 - q) / wnorm;
    out.grad = Eigen::VectorXcd::Zero(fvec.size());
    for (int s = 0; s < n; ++s) {
      Eigen::VectorXcd psi_s = psi.segment(static_cast<Eigen::Index>(s) * m, m);
      for (int t = 0; t < n; ++t)
        for (int x = 0; x < ord; ++x)
          out.grad((static_cast<Eigen::Index>(s) * n + t) * ord + x) =
              pref * sp[static_cast<std::size_t>(x) * n + t].dot(psi_s);
    }
    return out;
  }
};

// Numerator |<f, u>| for the scalar (1x1, level 1) case.
struct ScalarNumerator {
  Eigen::VectorXcd u;

  EvalResult operator()(const Eigen::VectorXcd& f, bool want_grad) const {
    EvalResult out;
    std::complex<double> pv = pairing_sum(f, u);
    out.value = std::abs(pv);
    if (!want_grad) return out;
    std::complex<double> phase =
        out.value > 0.0 ? pv / out.value : std::complex<double>(1.0);
    out.grad = phase * u.conjugate();
    return out;
  }
};

// Numerator ||C(f)||_{p->p} where C is the (n m) x (n m) matrix of pairings
// <f_st, u_ij>; gradient through the optimal (alpha, beta) pair.
struct CompressionNumerator {
  const std::vector<std::vector<BpElement>>* U = nullptr;
  int n = 1;
  int m = 1;
  int order = 1;
  double p = 2.0;
  SolverOptions inner;

  Eigen::MatrixXcd compression(const Eigen::VectorXcd& f) const {
    Eigen::MatrixXcd C(n * m, n * m);
    for (int s = 0; s < n; ++s)
      for (int t = 0; t < n; ++t) {
        Eigen::VectorXcd fst =
            f.segment((static_cast<Eigen::Index>(s) * n + t) * order, order);
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j)
            C(s * m + i, t * m + j) = pairing_sum(fst, (*U)[i][j].values);
      }
    return C;
  }

  EvalResult operator()(const Eigen::VectorXcd& f, bool want_grad) const {
    EvalResult out;
    Eigen::MatrixXcd C = compression(f);
    if (C.cwiseAbs().maxCoeff() <= 0.0) {
      if (want_grad) out.grad = Eigen::VectorXcd::Zero(f.size());
      return out;
    }
    NormEstimate est = mixed_scalar_norm(C, p, p, inner);
    Eigen::VectorXcd alpha = est.witness;
    double an = detail::lp_norm(alpha, p);
    if (an <= 0.0) return out;
    alpha /= an;
    Eigen::VectorXcd y = C * alpha;
    out.value = detail::lp_norm(y, p);
    if (!want_grad || out.value <= 0.0) return out;

    Eigen::VectorXcd beta =
        psi_vec(y, p).conjugate() / std::pow(out.value, p - 1.0);
    out.grad = Eigen::VectorXcd::Zero(f.size());
    for (int s = 0; s < n; ++s)
      for (int t = 0; t < n; ++t)
        for (int x = 0; x < order; ++x) {
          std::complex<double> d = 0.0;
          for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
              d += beta(s * m + i) * (*U)[i][j].values(x) * alpha(t * m + j);
          out.grad((static_cast<Eigen::Index>(s) * n + t) * order + x) =
              std::conj(d);
        }
    return out;
  }
};

struct AscentOutcome {
  Eigen::VectorXcd point;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Projected-gradient ascent of num(f)/den(f) over the euclidean sphere.
AscentOutcome ascend_bp_ratio(const EvalFn& num, const EvalFn& den,
                              Eigen::VectorXcd f, int max_iter) {
  AscentOutcome out;
  double fn = f.norm();
  if (fn <= 0.0) return out;
  f /= fn;

  EvalResult rn = num(f, true);
  EvalResult rd = den(f, true);
  if (rd.value <= 1e-12 * std::max(1.0, rn.value)) {
    out.point = f;
    return out;
  }
  double val = rn.value / rd.value;
  double alpha = 1.0;

  int it = 0;
  for (; it < max_iter; ++it) {
    Eigen::VectorXcd g =
        (rn.grad * rd.value - rd.grad * rn.value) / (rd.value * rd.value);
    std::complex<double> rad = f.dot(g);
    g -= rad.real() * f;
    double gn = g.norm();
    if (gn <= 1e-11 * std::max(1.0, val)) {
      out.converged = true;
      break;
    }

    bool accepted = false;
    for (int h = 0; h < 25; ++h) {
      Eigen::VectorXcd ftry = f + alpha * g;
      double tn = ftry.norm();
      if (tn <= 0.0) {
        alpha *= 0.5;
        continue;
      }
      ftry /= tn;
      EvalResult qn = num(ftry, false);
      EvalResult qd = den(ftry, false);
      if (qd.value <= 1e-12 * std::max(1.0, qn.value)) {
        alpha *= 0.5;
        continue;
      }
      double vtry = qn.value / qd.value;
      if (vtry > val + 1e-4 * alpha * gn * gn) {
        f = ftry;
        val = vtry;
        rn = num(f, true);
        rd = den(f, true);
        alpha = std::min(alpha * 2.0, 1e3);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      out.converged = true;
      break;
    }
  }
  out.point = f;
  out.value = val;
  out.iterations = it;
  return out;
}

std::vector<Eigen::VectorXcd> scalar_starts(const Eigen::VectorXcd& u,
                                            int order, int count,
                                            CounterRng rng) {
  std::vector<Eigen::VectorXcd> starts;
  for (int g = 0; g < order; ++g)
    starts.push_back(Eigen::VectorXcd::Unit(order, g));
  if (u.norm() > 0.0) {
    starts.push_back(u.conjugate());
    starts.push_back(u);
  }
  while (static_cast<int>(starts.size()) < count) {
    Eigen::VectorXcd r(order);
    for (int i = 0; i < order; ++i) r(i) = rng.next_cnormal();
    starts.push_back(std::move(r));
  }
  return starts;
}

// Heuristic consensus upper for a sup-type quantity: when enough of the
// multistart finals agree with the best, trust the best as nearly attained.
void attach_consensus(NormEstimate* est, const std::vector<double>& finals) {
  if (finals.empty()) return;
  double best = *std::max_element(finals.begin(), finals.end());
  int agree = 0;
  for (double v : finals)
    if (v >= best * (1.0 - 1e-8) - 1e-14) ++agree;
  int needed = std::min<int>(3, static_cast<int>(finals.size()));
  if (agree >= needed) {
    double cap = std::max(best, est->lower) * (1.0 + 1e-8) + 1e-14;
    if (cap < est->upper) {
      est->upper = cap;
      est->upper_kind = UpperKind::consensus;
      est->upper_certified = false;
    }
  }
}

}  // namespace

BpElement bp_from_values(GroupPtr group, Eigen::VectorXcd values) {
  if (!group || values.size() != group->order())
    throw ShapeMismatchError("value list does not match the group order");
  return BpElement{std::move(group), std::move(values), std::nullopt};
}

BpElement coefficient_function(const RepPtr& rep, const SpaceVector& xi,
                               const DualVector& eta) {
  require_same_space(rep->space(), xi.space);
  require_same_space(rep->space(), eta.space);
  const int n = rep->group()->order();
  Eigen::VectorXcd values(n);
  for (int x = 0; x < n; ++x)
    values(x) = dual_pair(SpaceVector{rep->space(), rep->matrix(x) * xi.coords},
                          eta);
  BpElement u{rep->group(), std::move(values), Realization{rep, xi, eta}};
  return u;
}

BpElement pointwise_product(const BpElement& u, const BpElement& v) {
  if (!u.group->same_as(*v.group))
    throw GroupMismatchError("product of coefficient functions across groups");
  return BpElement{u.group, u.values.cwiseProduct(v.values), std::nullopt};
}

std::complex<double> pairing(const GroupFunction& f, const BpElement& u) {
  if (!f.group->same_as(*u.group))
    throw GroupMismatchError("pairing across different groups");
  return pairing_sum(f.coeffs, u.values);
}

double pairing_realization_residual(const GroupFunction& f,
                                    const BpElement& u) {
  if (!u.realization) return 0.0;
  const Realization& real = *u.realization;
  std::complex<double> via_values = pairing(f, u);
  Eigen::MatrixXcd L = real.rep->lift_matrix(f);
  std::complex<double> via_real = dual_pair(
      SpaceVector{real.rep->space(), L * real.xi.coords}, real.eta);
  return std::abs(via_values - via_real);
}

BpLower bp_norm_lower(const UniversalFamily& family, const BpElement& u,
                      const SolverOptions& opts) {
  if (!family.base->group()->same_as(*u.group))
    throw GroupMismatchError("element lives on a different group");
  const GroupPtr& group = family.base->group();
  const int order = group->order();
  BpLower out;

  // No finite bound exists when u pairs with a function the whole family
  // annihilates.
  Eigen::MatrixXcd ideal = null_ideal(family.assembled);
  for (Eigen::Index j = 0; j < ideal.cols(); ++j) {
    Eigen::VectorXcd f0 = ideal.col(j);
    double s = std::abs(pairing_sum(f0, u.values));
    if (s > 1e-9 * std::max(1.0, f0.norm() * u.values.norm())) {
      out.unbounded = true;
      out.violation = f0;
      out.value = kInf;
      out.certified = kInf;
      return out;
    }
  }
  if (u.values.norm() == 0.0) {
    out.witness = delta(group, group->identity());
    out.witness_norm = family_norm(family, out.witness, opts);
    return out;
  }

  FamilyDenominator den(family, 1, opts);
  ScalarNumerator num{u.values};
  EvalFn numf = [&num](const Eigen::VectorXcd& f, bool g) { return num(f, g); };
  EvalFn denf = [&den](const Eigen::VectorXcd& f, bool g) { return den(f, g); };

  Hasher h;
  h.u64(family.base->hash());
  for (Eigen::Index i = 0; i < u.values.size(); ++i) h.c128(u.values(i));
  CounterRng rng(opts.seed, h.digest(), 0x6e70);

  double best = -1.0;
  Eigen::VectorXcd best_f;
  std::vector<double> finals;
  for (const auto& start :
       scalar_starts(u.values, order, std::max(opts.starts, order + 2), rng)) {
    AscentOutcome res = ascend_bp_ratio(numf, denf, start, opts.max_iterations);
    out.iterations += res.iterations;
    if (res.point.size() == 0) continue;
    finals.push_back(res.value);
    if (res.value > best) {
      best = res.value;
      best_f = res.point;
    }
  }
  if (best_f.size() == 0) return out;

  out.witness = GroupFunction{group, best_f};
  out.witness_norm = family_norm(family, out.witness, opts);
  out.pairing_value = pairing_sum(best_f, u.values);
  double num_val = std::abs(out.pairing_value);
  if (out.witness_norm.upper <= 1e-14) {
    if (num_val > 1e-12) {
      out.unbounded = true;
      out.violation = best_f;
      out.value = kInf;
      out.certified = kInf;
    }
    return out;
  }
  out.value = num_val / out.witness_norm.upper;
  out.certified = std::isfinite(out.witness_norm.certified_upper)
                      ? num_val / out.witness_norm.certified_upper
                      : 0.0;
  return out;
}

namespace {

// Minimal-dual-norm interpolation for a fixed generator: solve the linear
// system u(x) = <(S M(x) xi), eta> together with annihilation of the null
// directions, then minimize the l_{p'} norm over the solution affine space.
struct InterpolationResult {
  bool feasible = false;
  double value = kInf;
  double residual = kInf;
  Eigen::VectorXcd eta;
};

InterpolationResult interpolate_eta(const RepPtr& rep,
                                    const Eigen::VectorXcd& xi,
                                    const Eigen::VectorXcd& u,
                                    const QuotientSolveOptions& qopts) {
  const SpacePtr& space = rep->space();
  const int order = rep->group()->order();
  const Eigen::Index m = space->ambient_dim();
  const Eigen::MatrixXcd& S = space->basis();
  const Eigen::MatrixXcd& N = space->null_basis();

  Eigen::MatrixXcd A(order + N.cols(), m);
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(order + N.cols());
  for (int x = 0; x < order; ++x) {
    A.row(x) = (S * (rep->matrix(x) * xi)).transpose();
    b(x) = u(x);
  }
  for (Eigen::Index j = 0; j < N.cols(); ++j)
    A.row(order + j) = N.col(j).transpose();

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(A);
  cod.setThreshold(1e-10);
  Eigen::VectorXcd eta0 = cod.solve(b);

  InterpolationResult out;
  double uscale = std::max(1.0, u.cwiseAbs().maxCoeff());
  out.residual = (A.topRows(order) * eta0 - u).cwiseAbs().maxCoeff() / uscale;
  if (out.residual > 1e-8) return out;

  Eigen::FullPivLU<Eigen::MatrixXcd> lu(A);
  lu.setThreshold(1e-10);
  Eigen::MatrixXcd K = lu.rank() == m ? Eigen::MatrixXcd(m, 0) : lu.kernel();
  QuotientSolveResult qr =
      detail::minimize_lp_affine(eta0, K, space->dual_p(), qopts);
  out.feasible = true;
  out.value = qr.value;
  out.eta = K.cols() > 0 ? Eigen::VectorXcd(eta0 + K * qr.minimizer) : eta0;
  return out;
}

// Character vectors (values chi(x)) for a finite abelian group, extracted as
// eigenvectors of a generic element of the translation algebra and verified
// multiplicatively. Deterministic given the group.
std::vector<Eigen::VectorXcd> character_table(const GroupPtr& G) {
  const int n = G->order();
  for (std::uint64_t attempt = 0; attempt < 5; ++attempt) {
    CounterRng rng(0xfa57, G->hash(), attempt);
    Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(n, n);
    for (int g = 0; g < n; ++g) {
      std::complex<double> c = rng.next_cnormal();
      for (int x = 0; x < n; ++x) T(G->mul(g, x), x) += c;
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(T);
    if (es.info() != Eigen::Success) continue;

    std::vector<Eigen::VectorXcd> chars;
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      Eigen::VectorXcd v = es.eigenvectors().col(i);
      std::complex<double> at_e = v(G->identity());
      if (std::abs(at_e) < 1e-8) {
        ok = false;
        break;
      }
      v /= at_e;
      for (int x = 0; x < n && ok; ++x)
        if (std::abs(std::abs(v(x)) - 1.0) > 1e-8) ok = false;
      for (int a = 0; a < n && ok; ++a)
        for (int b = 0; b < n && ok; ++b)
          if (std::abs(v(G->mul(a, b)) - v(a) * v(b)) > 1e-8) ok = false;
      if (ok) chars.push_back(std::move(v));
    }
    if (!ok || static_cast<int>(chars.size()) != n) continue;

    // Canonical order, and a pairwise-distinctness guard against a
    // degenerate random combination.
    auto key = [n](const Eigen::VectorXcd& v) {
      std::vector<std::pair<long long, long long>> k;
      k.reserve(static_cast<std::size_t>(n));
      for (int x = 0; x < n; ++x)
        k.emplace_back(std::llround(v(x).real() * 1e9),
                       std::llround(v(x).imag() * 1e9));
      return k;
    };
    std::sort(chars.begin(), chars.end(),
              [&key](const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
                return key(a) < key(b);
              });
    bool distinct = true;
    for (int i = 0; i + 1 < n && distinct; ++i)
      if ((chars[static_cast<std::size_t>(i)] -
           chars[static_cast<std::size_t>(i) + 1])
              .cwiseAbs()
              .maxCoeff() < 1e-6)
        distinct = false;
    if (!distinct) continue;
    return chars;
  }
  throw Error("character extraction did not stabilize");
}

// Downhill simplex over real parameter vectors; returns the best value seen
// and writes the best point back. Infinite objective values are allowed.
double nelder_mead(const std::function<double(const Eigen::VectorXd&)>& fn,
                   const Eigen::VectorXd& x0, int budget,
                   Eigen::VectorXd* best_x) {
  const int d = static_cast<int>(x0.size());
  std::vector<Eigen::VectorXd> pts;
  std::vector<double> vals;
  pts.push_back(x0);
  vals.push_back(fn(x0));
  for (int i = 0; i < d; ++i) {
    Eigen::VectorXd x = x0;
    x(i) += x0(i) != 0.0 ? 0.1 * std::abs(x0(i)) + 0.05 : 0.1;
    pts.push_back(x);
    vals.push_back(fn(x));
  }
  int evals = d + 1;

  auto order_simplex = [&] {
    std::vector<int> idx(pts.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return vals[a] < vals[b]; });
    std::vector<Eigen::VectorXd> np;
    std::vector<double> nv;
    for (int i : idx) {
      np.push_back(pts[static_cast<std::size_t>(i)]);
      nv.push_back(vals[static_cast<std::size_t>(i)]);
    }
    pts.swap(np);
    vals.swap(nv);
  };

  while (evals < budget) {
    order_simplex();
    if (std::isfinite(vals[0]) && std::isfinite(vals.back()) &&
        vals.back() - vals[0] <= 1e-12 * std::max(1.0, std::abs(vals[0])))
      break;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < d; ++i) centroid += pts[static_cast<std::size_t>(i)];
    centroid /= d;

    Eigen::VectorXd xr = centroid + (centroid - pts.back());
    double fr = fn(xr);
    ++evals;
    if (fr < vals[0]) {
      Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts.back());
      double fe = fn(xe);
      ++evals;
      if (fe < fr) {
        pts.back() = xe;
        vals.back() = fe;
      } else {
        pts.back() = xr;
        vals.back() = fr;
      }
    } else if (fr < vals[vals.size() - 2]) {
      pts.back() = xr;
      vals.back() = fr;
    } else {
      Eigen::VectorXd xc = centroid + 0.5 * (pts.back() - centroid);
      double fc = fn(xc);
      ++evals;
      if (fc < vals.back()) {
        pts.back() = xc;
        vals.back() = fc;
      } else {
        for (std::size_t i = 1; i < pts.size(); ++i) {
          pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
          vals[i] = fn(pts[i]);
          ++evals;
        }
      }
    }
  }
  order_simplex();
  if (best_x) *best_x = pts[0];
  return vals[0];
}

Eigen::VectorXcd to_complex(const Eigen::VectorXd& z) {
  const Eigen::Index k = z.size() / 2;
  Eigen::VectorXcd out(k);
  for (Eigen::Index i = 0; i < k; ++i)
    out(i) = std::complex<double>(z(i), z(k + i));
  return out;
}

Eigen::VectorXd to_real(const Eigen::VectorXcd& v) {
  Eigen::VectorXd out(2 * v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out(i) = v(i).real();
    out(v.size() + i) = v(i).imag();
  }
  return out;
}

}  // namespace

BpUpper bp_norm_upper(const BpElement& u, const std::vector<RepPtr>& candidates,
                      const SolverOptions& opts) {
  if (candidates.empty())
    throw ConfigError("upper-bound search needs at least one candidate");
  const GroupPtr& group = u.group;
  for (const auto& rep : candidates)
    if (!rep->group()->same_as(*group))
      throw GroupMismatchError("candidate lives on a different group");

  // Direct sums of up to three distinct candidates, capped to keep the
  // search affordable when the candidate list is long.
  std::vector<std::vector<int>> subsets;
  const int c = static_cast<int>(candidates.size());
  for (int i = 0; i < c; ++i) subsets.push_back({i});
  for (int i = 0; i < c; ++i)
    for (int j = i + 1; j < c; ++j) subsets.push_back({i, j});
  for (int i = 0; i < c; ++i)
    for (int j = i + 1; j < c; ++j)
      for (int l = j + 1; l < c; ++l) subsets.push_back({i, j, l});
  if (subsets.size() > 25) subsets.resize(25);

  BpUpper out;
  for (const auto& subset : subsets) {
    RepPtr rep;
    if (subset.size() == 1) {
      rep = candidates[static_cast<std::size_t>(subset[0])];
    } else {
      std::vector<RepPtr> parts;
      for (int idx : subset)
        parts.push_back(candidates[static_cast<std::size_t>(idx)]);
      rep = direct_sum_rep(parts);
    }
    const int k = rep->dim();

    auto objective = [&](const Eigen::VectorXd& z) -> double {
      Eigen::VectorXcd xi = to_complex(z);
      double xin = xi.norm();
      if (xin <= 1e-12) return kInf;
      xi /= xin;
      InterpolationResult ir =
          interpolate_eta(rep, xi, u.values, opts.quotient);
      if (!ir.feasible) return kInf;
      return vector_norm(SpaceVector{rep->space(), xi}) * ir.value;
    };

    // Seeds: an attached realization when it lives on this rep, character
    // frames for abelian groups at matching dimension, coordinates, random.
    std::vector<Eigen::VectorXcd> seeds;
    if (u.realization && subset.size() == 1 &&
        u.realization->rep->same_as(*rep) &&
        u.realization->xi.coords.norm() > 0.0)
      seeds.push_back(u.realization->xi.coords);
    if (group->is_abelian() && k == group->order()) {
      const int n = group->order();
      std::vector<Eigen::VectorXcd> chars = character_table(group);
      Eigen::VectorXcd xi = Eigen::VectorXcd::Zero(n);
      for (const auto& chi : chars) {
        std::complex<double> uhat = 0.0;
        for (int x = 0; x < n; ++x) uhat += u.values(x) * std::conj(chi(x));
        uhat /= static_cast<double>(n);
        // u = sum uhat(chi) chi; the square-root split of each coefficient
        // over xi and eta is optimal at exponent 2.
        xi += std::sqrt(uhat / static_cast<double>(n)) * chi.conjugate();
      }
      if (xi.norm() > 1e-12) seeds.push_back(xi);
    }
    seeds.push_back(Eigen::VectorXcd::Ones(k) / std::sqrt(double(k)));
    for (int i = 0; i < std::min(k, 6); ++i)
      seeds.push_back(Eigen::VectorXcd::Unit(k, i));
    Hasher h;
    h.u64(rep->hash());
    for (Eigen::Index i = 0; i < u.values.size(); ++i) h.c128(u.values(i));
    CounterRng rng(opts.seed, h.digest(), 0xb9);
    for (int r = 0; r < 4; ++r) {
      Eigen::VectorXcd xi(k);
      for (int i = 0; i < k; ++i) xi(i) = rng.next_cnormal();
      seeds.push_back(std::move(xi));
    }

    double best_seed_val = kInf;
    Eigen::VectorXcd best_seed;
    for (const auto& s : seeds) {
      double v = objective(to_real(s));
      ++out.iterations;
      if (v < best_seed_val) {
        best_seed_val = v;
        best_seed = s;
      }
    }
    if (!std::isfinite(best_seed_val)) continue;

    Eigen::VectorXd polished;
    int budget = std::max(200, opts.max_iterations);
    double val =
        nelder_mead(objective, to_real(best_seed), budget, &polished);
    out.iterations += budget;
    if (val < out.value) {
      Eigen::VectorXcd xi = to_complex(polished);
      xi /= xi.norm();
      InterpolationResult ir =
          interpolate_eta(rep, xi, u.values, opts.quotient);
      if (!ir.feasible) continue;
      out.value = val;
      out.feasible = true;
      out.rep = rep;
      out.xi_coords = xi;
      out.eta_ambient = ir.eta;
      out.residual = ir.residual;
    }
  }

  if (!out.feasible)
    throw InfeasibleError(
        "no candidate representation interpolates the coefficient function");
  return out;
}

BpBracket bp_norm_bracket(const UniversalFamily& family, const BpElement& u,
                          const std::vector<RepPtr>& candidates,
                          const SolverOptions& opts) {
  BpBracket out;
  out.lower = bp_norm_lower(family, u, opts);
  out.upper = bp_norm_upper(u, candidates, opts);
  return out;
}

namespace {

BpMatrixLevel run_level(const UniversalFamily& family,
                        const std::vector<std::vector<BpElement>>& U, int n,
                        const std::vector<Eigen::VectorXcd>& carried_seeds,
                        const SolverOptions& opts) {
  const GroupPtr& group = family.base->group();
  const int order = group->order();
  const int m = static_cast<int>(U.size());
  const double p = family.base->space()->p();
  const Eigen::Index dim = static_cast<Eigen::Index>(n) * n * order;

  FamilyDenominator den(family, n, opts);
  EvalFn denf = [&den](const Eigen::VectorXcd& f, bool g) { return den(f, g); };

  EvalFn numf;
  ScalarNumerator snum;
  CompressionNumerator cnum;
  if (n == 1 && m == 1) {
    snum.u = U[0][0].values;
    numf = [&snum](const Eigen::VectorXcd& f, bool g) { return snum(f, g); };
  } else {
    cnum.U = &U;
    cnum.n = n;
    cnum.m = m;
    cnum.order = order;
    cnum.p = p;
    cnum.inner = opts;
    cnum.inner.starts = std::min(opts.starts, 4);
    cnum.inner.max_iterations = std::min(opts.max_iterations, 100);
    cnum.inner.bruteforce_resolution = std::min(opts.bruteforce_resolution, 6);
    cnum.inner.polish_count = std::min(opts.polish_count, 2);
    numf = [&cnum](const Eigen::VectorXcd& f, bool g) { return cnum(f, g); };
  }

  // Starts: diagonal delta arrays, carried-in embeddings of lower levels,
  // random arrays.
  std::vector<Eigen::VectorXcd> starts;
  for (int g = 0; g < order; ++g) {
    Eigen::VectorXcd f = Eigen::VectorXcd::Zero(dim);
    for (int s = 0; s < n; ++s)
      f((static_cast<Eigen::Index>(s) * n + s) * order + g) = 1.0;
    starts.push_back(std::move(f));
  }
  for (const auto& seed : carried_seeds)
    if (seed.size() <= dim && seed.size() % order == 0) {
      // Corner embedding: the lower-level array occupies the leading block.
      int nsmall = static_cast<int>(
          std::llround(std::sqrt(double(seed.size() / order))));
      if (nsmall >= 1 && nsmall <= n &&
          static_cast<Eigen::Index>(nsmall) * nsmall * order == seed.size()) {
        Eigen::VectorXcd f = Eigen::VectorXcd::Zero(dim);
        for (int s = 0; s < nsmall; ++s)
          for (int t = 0; t < nsmall; ++t)
            f.segment((static_cast<Eigen::Index>(s) * n + t) * order, order) =
                seed.segment(
                    (static_cast<Eigen::Index>(s) * nsmall + t) * order, order);
        starts.push_back(std::move(f));
      }
    }
  Hasher h;
  h.u64(family.base->hash()).i32(n).i32(m);
  for (const auto& row : U)
    for (const auto& e : row)
      for (Eigen::Index i = 0; i < e.values.size(); ++i) h.c128(e.values(i));
  CounterRng rng(opts.seed, h.digest(), 0x313);
  while (static_cast<int>(starts.size()) < std::max(opts.starts, order + 2)) {
    Eigen::VectorXcd f(dim);
    for (Eigen::Index i = 0; i < dim; ++i) f(i) = rng.next_cnormal();
    starts.push_back(std::move(f));
  }

  BpMatrixLevel level;
  level.n = n;
  double best = -1.0;
  Eigen::VectorXcd best_f;
  std::vector<double> finals;
  int iters = 0;
  for (const auto& start : starts) {
    AscentOutcome res = ascend_bp_ratio(numf, denf, start, opts.max_iterations);
    iters += res.iterations;
    if (res.point.size() == 0) continue;
    finals.push_back(res.value);
    if (res.value > best) {
      best = res.value;
      best_f = res.point;
    }
  }
  if (best_f.size() == 0) {
    level.estimate.lower = 0.0;
    level.estimate.upper = 0.0;
    level.estimate.certified_upper = 0.0;
    level.estimate.upper_certified = true;
    level.estimate.upper_kind = UpperKind::exact;
    return level;
  }

  // Honest recompute of the winner with full budgets.
  GroupFunctionMatrix F = unflatten(group, n, best_f);
  NormEstimate den_full = family_matrix_norm(family, F, opts);
  double num_val;
  if (n == 1 && m == 1) {
    num_val = std::abs(pairing_sum(best_f, U[0][0].values));
  } else {
    CompressionNumerator full = cnum;
    full.inner = opts;
    EvalResult r = full(best_f, false);
    num_val = r.value;
  }

  level.estimate.method = NormMethod::boyd_multistart;
  level.estimate.iterations = iters;
  level.estimate.witness = best_f;
  level.family_upper = den_full.upper;
  level.estimate.lower =
      den_full.upper > 0.0 ? num_val / den_full.upper : 0.0;
  attach_consensus(&level.estimate, finals);
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t)
      level.witness_array.push_back(
          best_f.segment((static_cast<Eigen::Index>(s) * n + t) * order,
                         order));
  return level;
}

}  // namespace

BpMatrixReport bp_matrix_norm(const UniversalFamily& family,
                              const std::vector<std::vector<BpElement>>& U,
                              int n_max, const SolverOptions& opts) {
  const int m = static_cast<int>(U.size());
  if (m < 1) throw ShapeMismatchError("empty coefficient array");
  for (const auto& row : U)
    if (static_cast<int>(row.size()) != m)
      throw ShapeMismatchError("coefficient array must be square");
  if (n_max < 1) throw ConfigError("n_max must be at least 1");

  BpMatrixReport out;
  std::vector<Eigen::VectorXcd> carried;
  for (int n = 1; n <= n_max; ++n) {
    BpMatrixLevel level = run_level(family, U, n, carried, opts);
    carried.push_back(level.estimate.witness);
    if (level.estimate.lower > out.best) {
      out.best = level.estimate.lower;
      out.best_n = n;
    }
    out.levels.push_back(std::move(level));
  }
  return out;
}

CbReport cb_functional_check(const UniversalFamily& family, const BpElement& u,
                             int n_max, double tol, const SolverOptions& opts) {
  BpMatrixReport rep = bp_matrix_norm(family, {{u}}, n_max, opts);
  CbReport out;
  out.levels = std::move(rep.levels);
  for (std::size_t i = 1; i < out.levels.size(); ++i) {
    CheckOutcome oc =
        check_equal(out.levels[i].estimate, out.levels[0].estimate, tol);
    out.any_fail = out.any_fail || oc.verdict == Verdict::FAIL;
    out.outcomes.push_back(std::move(oc));
  }
  return out;
}

double fourier_oracle_p2(const BpElement& u) {
  const GroupPtr& G = u.group;
  if (!G->is_abelian())
    throw NotAbelianError("the Fourier oracle needs an abelian group");
  const int n = G->order();
  std::vector<Eigen::VectorXcd> chars = character_table(G);
  double total = 0.0;
  for (const auto& chi : chars) {
    std::complex<double> uhat = 0.0;
    for (int x = 0; x < n; ++x) uhat += u.values(x) * std::conj(chi(x));
    total += std::abs(uhat) / static_cast<double>(n);
  }
  return total;
}

DualityReport duality_contractivity_check(const UniversalFamily& family,
                                          const Eigen::MatrixXcd& phi,
                                          const SolverOptions& opts) {
  const RepPtr& base = family.base;
  const int k = base->dim();
  if (phi.rows() != k || phi.cols() != k)
    throw ShapeMismatchError("functional matrix does not match the rep");
  const GroupPtr& group = base->group();
  const int order = group->order();

  DualityReport out;
  Eigen::VectorXcd values(order);
  for (int x = 0; x < order; ++x)
    values(x) = (base->matrix(x).array() * phi.array()).sum();
  out.u = bp_from_values(group, values);

  // Operator norm of phi on the base algebra: sup |<f,u>| / ||pi(f)||.
  ScalarNumerator num{values};
  EvalFn numf = [&num](const Eigen::VectorXcd& f, bool g) { return num(f, g); };
  SolverOptions inner = opts;
  inner.starts = std::min(opts.starts, 6);
  inner.max_iterations = std::min(opts.max_iterations, 200);
  inner.bruteforce_resolution = std::min(opts.bruteforce_resolution, 12);
  EvalFn denf = [&](const Eigen::VectorXcd& f, bool want_grad) {
    EvalResult res;
    GroupFunction fn{group, f};
    Eigen::MatrixXcd L = base->lift_matrix(fn);
    NormEstimate est = opnorm(L, base->space(), base->space(), inner);
    res.value = est.lower;
    if (!want_grad || est.lower <= 0.0) return res;
    Eigen::VectorXcd w = est.witness;
    double wnorm = vector_norm(SpaceVector{base->space(), w});
    if (wnorm <= 0.0) return res;
    Eigen::VectorXcd amb = base->space()->ambient(L * w);
    const double q = base->space()->p();
    double ambn = detail::lp_norm(amb, q);
    if (ambn <= 0.0) return res;
    Eigen::VectorXcd psi = psi_vec(amb, q);
    const Eigen::MatrixXcd& S = base->space()->basis();
    res.grad.resize(order);
    const double pref = std::pow(ambn, 1.0 - q) / wnorm;
    for (int x = 0; x < order; ++x)
      res.grad(x) = pref * (S * (base->matrix(x) * w)).dot(psi);
    return res;
  };

  Hasher h;
  h.u64(base->hash());
  for (Eigen::Index i = 0; i < values.size(); ++i) h.c128(values(i));
  CounterRng rng(opts.seed, h.digest(), 0xd0a1);
  double best = -1.0;
  Eigen::VectorXcd best_f;
  std::vector<double> finals;
  int iters = 0;
  for (const auto& start :
       scalar_starts(values, order, std::max(opts.starts, order + 2), rng)) {
    AscentOutcome res = ascend_bp_ratio(numf, denf, start, opts.max_iterations);
    iters += res.iterations;
    if (res.point.size() == 0) continue;
    finals.push_back(res.value);
    if (res.value > best) {
      best = res.value;
      best_f = res.point;
    }
  }
  if (best_f.size() > 0) {
    GroupFunction fw{group, best_f};
    NormEstimate den_full = pf_norm(base, fw, opts);
    double num_val = std::abs(pairing_sum(best_f, values));
    out.phi_norm.lower =
        den_full.upper > 0.0 ? num_val / den_full.upper : 0.0;
    out.phi_norm.witness = best_f;
    out.phi_norm.method = NormMethod::boyd_multistart;
    out.phi_norm.iterations = iters;
    attach_consensus(&out.phi_norm, finals);
  }

  out.u_lower = bp_norm_lower(family, out.u, opts);
  NormEstimate lhs;
  lhs.lower = out.u_lower.value;
  lhs.method = NormMethod::boyd_multistart;
  lhs.witness = out.u_lower.witness.coeffs;
  out.outcome = check_leq(lhs, out.phi_norm, 1e-4);
  return out;
}

}  // namespace pfa
