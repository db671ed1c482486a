#include "pfa/opnorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pfa/rng.hpp"

namespace pfa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using detail::lp_norm;

// Dual map of the l_r norm under the bilinear pairing: v -> |v|^{r-2} conj(v),
// so that sum_i v_i psi(v)_i = ||v||_r^r.
Eigen::VectorXcd dual_map(const Eigen::VectorXcd& v, double r) {
  Eigen::VectorXcd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    double m = std::abs(v(i));
    out(i) = m == 0.0 ? std::complex<double>(0.0)
                      : std::pow(m, r - 1.0) * std::conj(v(i)) / m;
  }
  return out;
}

Eigen::VectorXcd psi(const Eigen::VectorXcd& v, double r) {
  Eigen::VectorXcd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    double m = std::abs(v(i));
    out(i) = m == 0.0 ? std::complex<double>(0.0)
                      : std::pow(m, r - 2.0) * v(i);
  }
  return out;
}

struct InnerEval {
  double value = 0.0;
  Eigen::VectorXcd rep;  // ambient representative achieving the value
};

// Norm of the coset of `image` (coordinates in E) together with the ambient
// representative at which the quotient minimum is attained.
InnerEval eval_norm(const QSLpSpace& E, const Eigen::VectorXcd& image,
                    const QuotientSolveOptions& qopts) {
  InnerEval ev;
  Eigen::VectorXcd amb = E.ambient(image);
  if (!E.has_null()) {
    ev.value = lp_norm(amb, E.p());
    ev.rep = std::move(amb);
    return ev;
  }
  QuotientSolveResult qs = detail::minimize_lp_affine(amb, E.null_basis(), E.p(), qopts);
  ev.value = qs.value;
  ev.rep = amb + E.null_basis() * qs.minimizer;
  return ev;
}

double embed_const(double r, int n) {
  // ||z||_r <= embed_const * ||z||_2 on C^n.
  return std::max(1.0, std::pow(static_cast<double>(n), 1.0 / r - 0.5));
}
double shrink_const(double r, int n) {
  // ||z||_r >= shrink_const * ||z||_2 on C^n.
  return std::min(1.0, std::pow(static_cast<double>(n), 1.0 / r - 0.5));
}

// A is a generalized permutation (one nonzero per row and per column); for
// equal exponents its norm is the largest modulus. Returns the witness column.
bool generalized_permutation(const Eigen::MatrixXcd& A, double* maxabs,
                             Eigen::Index* argcol) {
  if (A.rows() != A.cols()) return false;
  std::vector<int> row_hits(static_cast<std::size_t>(A.rows()), 0);
  double best = -1.0;
  Eigen::Index bestcol = 0;
  for (Eigen::Index j = 0; j < A.cols(); ++j) {
    int hits = 0;
    double colval = 0.0;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      double m = std::abs(A(i, j));
      if (m != 0.0) {
        ++hits;
        ++row_hits[static_cast<std::size_t>(i)];
        colval = m;
      }
    }
    if (hits > 1) return false;
    if (colval > best) {
      best = colval;
      bestcol = j;
    }
  }
  for (int h : row_hits)
    if (h > 1) return false;
  *maxabs = std::max(best, 0.0);
  *argcol = bestcol;
  return true;
}

struct UpperBound {
  double value = kInf;
  UpperKind kind = UpperKind::none;
  bool certified = false;
};

void apply_uppers(NormEstimate* est, std::vector<UpperBound> candidates) {
  double best_cert = kInf;
  UpperBound best{kInf, UpperKind::none, false};
  for (const auto& c : candidates) {
    if (c.certified) best_cert = std::min(best_cert, c.value);
    if (c.value < best.value) best = c;
  }
  est->certified_upper = best_cert;
  if (best.value < kInf) {
    est->upper = std::max(best.value, est->lower);
    est->upper_kind = best.kind;
    est->upper_certified = best.certified;
  } else {
    est->upper = kInf;
    est->upper_kind = UpperKind::none;
    est->upper_certified = false;
  }
}

// Heuristic upper from multistart agreement: if enough independently seeded
// starts reach the same best value, take it as the norm up to 1e-8.
UpperBound consensus_upper(const std::vector<double>& values, double best) {
  UpperBound ub;
  if (best <= 0.0) return ub;
  int agree = 0;
  for (double v : values)
    if (v >= best * (1.0 - 1e-8) - 1e-14) ++agree;
  int needed = std::min<int>(3, static_cast<int>(values.size()));
  if (agree >= needed && !values.empty()) {
    ub.value = best * (1.0 + 1e-8) + 1e-14;
    ub.kind = UpperKind::consensus;
    ub.certified = false;
  }
  return ub;
}

// Holder bound ||A c||_q <= ||c||_p * l_{p'} norm of column q-norms; needs a
// plain domain. A subspace codomain contributes through its ambient matrix, a
// quotient codomain is dominated by it.
UpperBound holder_columns_upper(const Eigen::MatrixXcd& A,
                                const QSLpSpace& dom, const QSLpSpace& cod) {
  UpperBound ub;
  if (!dom.is_plain()) return ub;
  Eigen::MatrixXcd G = cod.is_plain() ? A : Eigen::MatrixXcd(cod.basis() * A);
  const double q = cod.p();
  Eigen::VectorXcd colnorms(G.cols());
  for (Eigen::Index j = 0; j < G.cols(); ++j)
    colnorms(j) = lp_norm(G.col(j), q);
  ub.value = lp_norm(colnorms, dom.dual_p());
  ub.kind = UpperKind::holder_columns;
  ub.certified = true;
  return ub;
}

UpperBound riesz_thorin_bound(const Eigen::MatrixXcd& A, const QSLpSpace& dom,
                              const QSLpSpace& cod) {
  UpperBound ub;
  if (!dom.is_plain() || !cod.is_plain() || dom.p() != cod.p()) return ub;
  ub.value = riesz_thorin_upper(A, dom.p());
  ub.kind = UpperKind::riesz_thorin;
  ub.certified = true;
  return ub;
}

struct AscentResult {
  double value = 0.0;
  Eigen::VectorXcd coords;
  int iterations = 0;
  bool converged = false;
};

// Projected gradient ascent on the ratio ||A c||_cod / ||c||_dom over the
// Euclidean unit sphere of coordinates. Quotient norms enter through their
// optimal representatives (Danskin), so the gradients below stay exact.
AscentResult ascend_ratio(const Eigen::MatrixXcd& A, const QSLpSpace& dom,
                          const QSLpSpace& cod, Eigen::VectorXcd c,
                          const SolverOptions& opts) {
  AscentResult res;
  const double q = cod.p();
  const double p = dom.p();
  const Eigen::MatrixXcd Gnum =
      cod.is_plain() ? A : Eigen::MatrixXcd(cod.basis() * A);
  const Eigen::MatrixXcd& Sdom = dom.basis();

  double cn = c.norm();
  if (cn == 0.0) return res;
  c /= cn;

  auto evaluate = [&](const Eigen::VectorXcd& x, InnerEval* num, InnerEval* den) {
    *num = eval_norm(cod, A * x, opts.quotient);
    *den = eval_norm(dom, x, opts.quotient);
  };

  InnerEval num, den;
  evaluate(c, &num, &den);
  double dscale = lp_norm(dom.ambient(c), p);
  if (den.value <= 1e-10 * std::max(dscale, 1e-30)) return res;
  double f = num.value / den.value;
  res.value = f;
  res.coords = c;

  double alpha = 0.25;
  for (int it = 0; it < opts.max_iterations; ++it) {
    res.iterations = it + 1;
    // Gradient of the ratio in real coordinates, packed as a complex vector.
    Eigen::VectorXcd gnum, gden;
    if (num.value > 0.0)
      gnum = std::pow(num.value, 1.0 - q) * (Gnum.adjoint() * psi(num.rep, q));
    else
      gnum = Eigen::VectorXcd::Zero(c.size());
    gden = std::pow(den.value, 1.0 - p) *
           (dom.is_plain() ? psi(den.rep, p)
                           : Eigen::VectorXcd(Sdom.adjoint() * psi(den.rep, p)));
    Eigen::VectorXcd g =
        (gnum * den.value - num.value * gden) / (den.value * den.value);
    // Remove the radial component; the ratio is scale invariant.
    std::complex<double> rad = c.adjoint() * g;
    g -= rad.real() * c;
    double gn = g.norm();
    if (gn <= 1e-11 * std::max(1.0, f)) {
      res.converged = true;
      break;
    }

    bool accepted = false;
    for (int h = 0; h < 25; ++h) {
      Eigen::VectorXcd c_try = c + alpha * g;
      c_try /= c_try.norm();
      InnerEval num_try, den_try;
      evaluate(c_try, &num_try, &den_try);
      double dts = lp_norm(dom.ambient(c_try), p);
      if (den_try.value > 1e-10 * std::max(dts, 1e-30)) {
        double f_try = num_try.value / den_try.value;
        if (f_try > f + 1e-4 * alpha * gn * gn) {
          c = c_try;
          num = num_try;
          den = den_try;
          f = f_try;
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (accepted) {
      res.value = f;
      res.coords = c;
      alpha = std::min(alpha * 2.0, 1e3);
    } else {
      res.converged = true;  // no ascent direction at line-search resolution
      break;
    }
  }
  return res;
}

NormEstimate finalize_lower(const Eigen::MatrixXcd& A, const SpacePtr& dom,
                            const SpacePtr& cod, NormEstimate est) {
  // The witness must reproduce the reported lower bound exactly.
  if (est.witness.size() == A.cols()) {
    double v = ratio_at(A, dom, cod, est.witness);
    if (std::isfinite(v)) est.lower = v;
  }
  est.upper = std::max(est.upper, est.lower);
  return est;
}

// At exponent 2 the space norm is a Euclidean seminorm of the coordinates:
// ||x|| = ||B x||_2 with B the basis image, projected off the null span for
// quotients.
Eigen::MatrixXcd hilbert_seminorm_factor(const QSLpSpace& space) {
  Eigen::MatrixXcd B = space.basis();
  if (space.has_null()) {
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(space.null_basis());
    Eigen::MatrixXcd Q =
        qr.householderQ() *
        Eigen::MatrixXcd::Identity(space.ambient_dim(), space.null_dim());
    B -= Q * (Q.adjoint() * B);
  }
  return B;
}

// Exact value when both exponents are 2: factor the two seminorms and read
// the norm off a plain singular value problem. Returns false (leaving `out`
// untouched) when the domain seminorm is degenerate or the operator feeds a
// null direction into the codomain; the iterative paths handle those.
bool hilbert_opnorm(const Eigen::MatrixXcd& A, const SpacePtr& dom,
                    const SpacePtr& cod, NormEstimate* out) {
  Eigen::MatrixXcd Bd = hilbert_seminorm_factor(*dom);
  Eigen::MatrixXcd Bc = hilbert_seminorm_factor(*cod);
  Eigen::JacobiSVD<Eigen::MatrixXcd> dsvd(
      Bd, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = dsvd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-12 * std::max(smax, 1.0)) ++r;
  if (r == 0) return false;

  Eigen::MatrixXcd M = Bc * A;
  if (r < Bd.cols()) {
    // A direction of zero domain norm must map to zero codomain norm, or
    // the ratio is unbounded and outside this closed form.
    Eigen::MatrixXcd V0 = dsvd.matrixV().rightCols(Bd.cols() - r);
    if ((M * V0).norm() > 1e-9 * std::max(1.0, M.norm())) return false;
  }

  Eigen::MatrixXcd lift_back =
      dsvd.matrixV().leftCols(r) * sv.head(r).cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXcd> tsvd(Eigen::MatrixXcd(M * lift_back),
                                          Eigen::ComputeThinV);
  NormEstimate est;
  est.method = NormMethod::svd;
  est.lower = tsvd.singularValues().size() ? tsvd.singularValues()(0) : 0.0;
  est.upper = est.lower;
  est.certified_upper = est.lower;
  est.upper_certified = true;
  est.upper_kind = UpperKind::exact;
  est.witness = tsvd.matrixV().cols() > 0
                    ? Eigen::VectorXcd(lift_back * tsvd.matrixV().col(0))
                    : Eigen::VectorXcd(lift_back.col(0));
  *out = std::move(est);
  return true;
}

std::uint64_t instance_key(const Eigen::MatrixXcd& A, const QSLpSpace& dom,
                           const QSLpSpace& cod) {
  Hasher h;
  h.u64(dom.hash()).u64(cod.hash());
  h.i32(static_cast<int>(A.rows())).i32(static_cast<int>(A.cols()));
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    for (Eigen::Index i = 0; i < A.rows(); ++i) h.c128(A(i, j));
  return h.digest();
}

Eigen::VectorXcd random_sphere_point(CounterRng& rng, Eigen::Index k) {
  Eigen::VectorXcd c(k);
  for (Eigen::Index i = 0; i < k; ++i) c(i) = rng.next_cnormal();
  double n = c.norm();
  if (n == 0.0) c(0) = 1.0;
  else c /= n;
  return c;
}

// Multistart ascent used for subspace and quotient domains (and as the brute
// force polish engine).
NormEstimate ascent_multistart(const Eigen::MatrixXcd& A, const SpacePtr& dom,
                               const SpacePtr& cod, const SolverOptions& opts,
                               std::vector<Eigen::VectorXcd> extra_starts) {
  const Eigen::Index k = A.cols();
  NormEstimate est;
  est.method = NormMethod::boyd_multistart;
  std::vector<Eigen::VectorXcd> starts = std::move(extra_starts);
  starts.push_back(Eigen::VectorXcd::Ones(k) / std::sqrt(static_cast<double>(k)));
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(k, 8); ++i)
    starts.push_back(Eigen::VectorXcd::Unit(k, i));
  CounterRng rng(opts.seed, instance_key(A, *dom, *cod), 0xa5c);
  while (static_cast<int>(starts.size()) < std::max(opts.starts, 4))
    starts.push_back(random_sphere_point(rng, k));
  for (const auto& s : opts.extra_starts)
    if (s.size() == k && s.norm() > 0.0) starts.push_back(s);

  std::vector<double> finals;
  bool best_conv = false;
  for (const auto& s : starts) {
    AscentResult r = ascend_ratio(A, *dom, *cod, s, opts);
    est.iterations += r.iterations;
    finals.push_back(r.value);
    if (r.value > est.lower) {
      est.lower = r.value;
      est.witness = r.coords;
      best_conv = r.converged;
    }
  }
  est.converged = best_conv;
  std::vector<UpperBound> ups;
  ups.push_back(holder_columns_upper(A, *dom, *cod));
  ups.push_back(riesz_thorin_bound(A, *dom, *cod));
  ups.push_back(consensus_upper(finals, est.lower));
  apply_uppers(&est, std::move(ups));
  return finalize_lower(A, dom, cod, est);
}

}  // namespace

std::string to_string(NormMethod m) {
  switch (m) {
    case NormMethod::closed_form: return "closed_form";
    case NormMethod::svd: return "svd";
    case NormMethod::boyd_multistart: return "boyd_multistart";
    case NormMethod::brute_force: return "brute_force";
    case NormMethod::riesz_thorin: return "riesz_thorin";
  }
  return "unknown";
}

std::string to_string(UpperKind k) {
  switch (k) {
    case UpperKind::exact: return "exact";
    case UpperKind::riesz_thorin: return "riesz_thorin";
    case UpperKind::holder_columns: return "holder_columns";
    case UpperKind::grid_slack: return "grid_slack";
    case UpperKind::consensus: return "consensus";
    case UpperKind::inherited: return "inherited";
    case UpperKind::none: return "none";
  }
  return "unknown";
}

double ratio_at(const Eigen::MatrixXcd& A, const SpacePtr& domain,
                const SpacePtr& codomain, const Eigen::VectorXcd& coords) {
  QuotientSolveOptions qopts;
  InnerEval den = eval_norm(*domain, coords, qopts);
  if (den.value == 0.0) return 0.0;
  InnerEval num = eval_norm(*codomain, A * coords, qopts);
  return num.value / den.value;
}

double riesz_thorin_upper(const Eigen::MatrixXcd& A, double p) {
  if (A.size() == 0) return 0.0;
  double col = 0.0, row = 0.0;
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    col = std::max(col, A.col(j).cwiseAbs().sum());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    row = std::max(row, A.row(i).cwiseAbs().sum());
  if (col == 0.0 || row == 0.0) return 0.0;
  return std::pow(col, 1.0 / p) * std::pow(row, 1.0 - 1.0 / p);
}

NormEstimate opnorm_boyd(const Eigen::MatrixXcd& A, double p_in, double p_out,
                         const SolverOptions& opts) {
  const Eigen::Index k = A.cols();
  const double pd = p_in / (p_in - 1.0);
  NormEstimate est;
  est.method = NormMethod::boyd_multistart;

  SpacePtr dom = QSLpSpace::lp(static_cast<int>(k), p_in);
  SpacePtr cod = QSLpSpace::lp(static_cast<int>(A.rows()), p_out);

  std::vector<Eigen::VectorXcd> starts;
  starts.push_back(Eigen::VectorXcd::Ones(k));
  Eigen::Index jbest = 0;
  double cbest = -1.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    double cv = lp_norm(A.col(j), p_out);
    if (cv > cbest) {
      cbest = cv;
      jbest = j;
    }
  }
  starts.push_back(Eigen::VectorXcd::Unit(k, jbest));
  CounterRng rng(opts.seed, instance_key(A, *dom, *cod), 0xb0bd);
  while (static_cast<int>(starts.size()) < std::max(opts.starts, 2))
    starts.push_back(random_sphere_point(rng, k));
  for (const auto& s : opts.extra_starts)
    if (s.size() == k && s.norm() > 0.0) starts.push_back(s);

  std::vector<double> finals;
  for (auto& x : starts) {
    double nx = lp_norm(x, p_in);
    if (nx == 0.0) continue;
    x /= nx;
    double value = 0.0;
    double prev = -1.0;
    bool conv = false;
    int stable = 0;
    for (int it = 0; it < opts.max_iterations; ++it) {
      ++est.iterations;
      Eigen::VectorXcd y = A * x;
      double ny = lp_norm(y, p_out);
      value = ny;
      if (ny == 0.0) break;
      if (prev >= 0.0 && std::abs(value - prev) <= 1e-13 * std::max(1.0, value)) {
        if (++stable >= 2) {
          conv = true;
          break;
        }
      } else {
        stable = 0;
      }
      prev = value;
      Eigen::VectorXcd w = A.transpose() * dual_map(y, p_out);
      Eigen::VectorXcd x_next = dual_map(w, pd);
      double nn = lp_norm(x_next, p_in);
      if (nn == 0.0) break;
      x = x_next / nn;
    }
    finals.push_back(value);
    if (value > est.lower) {
      est.lower = value;
      est.witness = x;
      est.converged = conv;
    }
  }

  std::vector<UpperBound> ups;
  ups.push_back(holder_columns_upper(A, *dom, *cod));
  ups.push_back(riesz_thorin_bound(A, *dom, *cod));
  ups.push_back(consensus_upper(finals, est.lower));
  apply_uppers(&est, std::move(ups));
  return finalize_lower(A, dom, cod, est);
}

NormEstimate opnorm_bruteforce(const Eigen::MatrixXcd& A, const SpacePtr& domain,
                               const SpacePtr& codomain, int resolution,
                               const SolverOptions& opts) {
  const Eigen::Index k = A.cols();
  if (2 * k - 1 > 6)
    throw DimensionTooLargeError(
        "brute force search sphere has real dimension above 6");
  if (resolution < 1) throw ConfigError("resolution must be at least 1");

  NormEstimate est;
  est.method = NormMethod::brute_force;

  const int nang = static_cast<int>(2 * k - 2);
  const int ntheta = static_cast<int>(k - 1);
  std::vector<int> sizes;
  for (int i = 0; i < ntheta; ++i) sizes.push_back(resolution + 1);
  for (int i = 0; i < ntheta; ++i) sizes.push_back(resolution);
  double total = 1.0;
  for (int s : sizes) total *= s;
  if (total > 5e7)
    throw DimensionTooLargeError("brute force grid exceeds the evaluation cap");

  struct Candidate {
    double value;
    Eigen::VectorXcd coords;
  };
  std::vector<Candidate> top;
  const int keep = std::max(1, opts.polish_count);

  const double pi = 3.14159265358979323846;
  Eigen::VectorXcd c(k);
  std::vector<int> idx(static_cast<std::size_t>(std::max(nang, 1)), 0);
  double grid_best = 0.0;
  QuotientSolveOptions qopts = opts.quotient;

  auto consider = [&](const Eigen::VectorXcd& point) {
    InnerEval den = eval_norm(*domain, point, qopts);
    double dref = lp_norm(domain->ambient(point), domain->p());
    if (den.value <= 1e-10 * std::max(dref, 1e-30)) return;
    InnerEval num = eval_norm(*codomain, A * point, qopts);
    double f = num.value / den.value;
    ++est.iterations;
    grid_best = std::max(grid_best, f);
    if (static_cast<int>(top.size()) < keep || f > top.back().value) {
      Candidate cand{f, point};
      auto it = std::lower_bound(
          top.begin(), top.end(), f,
          [](const Candidate& a, double v) { return a.value > v; });
      top.insert(it, std::move(cand));
      if (static_cast<int>(top.size()) > keep) top.pop_back();
    }
  };

  if (k == 1) {
    c(0) = 1.0;
    consider(c);
  } else {
    bool done = false;
    while (!done) {
      // moduli cascade from the theta block, phases from the phi block
      double sinprod = 1.0;
      for (int t = 0; t < ntheta; ++t) {
        double th = (pi / 2.0) * idx[static_cast<std::size_t>(t)] / resolution;
        double r = sinprod * std::cos(th);
        if (t == 0) {
          c(0) = r;
        } else {
          double ph = 2.0 * pi * idx[static_cast<std::size_t>(ntheta + t - 1)] /
                      resolution;
          c(t) = std::polar(r, ph);
        }
        sinprod *= std::sin(th);
      }
      double ph_last = 2.0 * pi *
                       idx[static_cast<std::size_t>(2 * ntheta - 1)] / resolution;
      c(k - 1) = std::polar(sinprod, ph_last);
      consider(c);

      int d = 0;
      while (d < nang) {
        if (++idx[static_cast<std::size_t>(d)] < sizes[static_cast<std::size_t>(d)]) break;
        idx[static_cast<std::size_t>(d)] = 0;
        ++d;
      }
      done = d == nang;
    }
  }

  // Local polish from the best grid cells and any caller-supplied starts.
  std::vector<double> finals;
  est.converged = true;
  std::vector<Eigen::VectorXcd> polish;
  polish.reserve(top.size() + opts.extra_starts.size());
  for (const auto& cand : top) polish.push_back(cand.coords);
  for (const auto& s : opts.extra_starts)
    if (s.size() == k && s.norm() > 0.0) polish.push_back(s);
  for (const auto& point : polish) {
    AscentResult r = ascend_ratio(A, *domain, *codomain, point, opts);
    est.iterations += r.iterations;
    finals.push_back(r.value);
    if (r.value > est.lower) {
      est.lower = r.value;
      est.witness = r.coords;
      est.converged = r.converged;
    }
  }
  if (est.lower == 0.0 && !top.empty()) {
    est.lower = top.front().value;
    est.witness = top.front().coords;
  }
  if (est.witness.size() == 0) {
    est.witness = Eigen::VectorXcd::Unit(k, 0);
    est.lower = ratio_at(A, domain, codomain, est.witness);
  }

  std::vector<UpperBound> ups;
  // Lipschitz cushion over one covering radius of the grid; sound only when
  // neither side involves a quotient minimum.
  if (!domain->has_null() && !codomain->has_null() && k >= 1) {
    Eigen::MatrixXcd G =
        codomain->is_plain() ? A : Eigen::MatrixXcd(codomain->basis() * A);
    Eigen::JacobiSVD<Eigen::MatrixXcd> gsvd(G);
    double sig_num = gsvd.singularValues().size() ? gsvd.singularValues()(0) : 0.0;
    double sig_dom_max = 1.0, sig_dom_min = 1.0;
    if (!domain->is_plain()) {
      Eigen::JacobiSVD<Eigen::MatrixXcd> dsvd(domain->basis());
      sig_dom_max = dsvd.singularValues()(0);
      sig_dom_min = dsvd.singularValues()(dsvd.singularValues().size() - 1);
    }
    const int m_num = codomain->ambient_dim();
    const int m_den = domain->ambient_dim();
    double Mnum = embed_const(codomain->p(), m_num) * sig_num;
    double Mden = embed_const(domain->p(), m_den) * sig_dom_max;
    double b = shrink_const(domain->p(), m_den) * sig_dom_min;
    double rcov = 0.0;
    if (k > 1) {
      double th_half = (pi / 2.0) / resolution / 2.0;
      double ph_half = (2.0 * pi) / resolution / 2.0;
      rcov = std::sqrt(static_cast<double>(ntheta) * th_half * th_half +
                       static_cast<double>(ntheta) * ph_half * ph_half);
    }
    if (b > 0.0) {
      UpperBound grid;
      grid.value = grid_best + rcov * (Mnum + grid_best * Mden) / b;
      grid.kind = UpperKind::grid_slack;
      grid.certified = true;
      ups.push_back(grid);
    }
  }
  ups.push_back(holder_columns_upper(A, *domain, *codomain));
  ups.push_back(riesz_thorin_bound(A, *domain, *codomain));
  ups.push_back(consensus_upper(finals, est.lower));
  apply_uppers(&est, std::move(ups));
  return finalize_lower(A, domain, codomain, est);
}

DirectSumNorm directsum_opnorm(const std::vector<Eigen::MatrixXcd>& blocks,
                               const std::vector<SpacePtr>& domains,
                               const std::vector<SpacePtr>& codomains,
                               const SolverOptions& opts) {
  if (blocks.empty() || blocks.size() != domains.size() ||
      blocks.size() != codomains.size())
    throw ShapeMismatchError("direct sum needs matching block/space lists");

  DirectSumNorm out;
  out.domain = direct_sum_space(domains);
  out.codomain = direct_sum_space(codomains);

  NormEstimate est;
  est.upper = 0.0;
  est.certified_upper = 0.0;
  est.upper_certified = true;
  est.upper_kind = UpperKind::exact;
  std::size_t arg = 0;
  std::vector<NormEstimate> parts;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    NormEstimate e = opnorm(blocks[i], domains[i], codomains[i], opts);
    est.iterations += e.iterations;
    if (e.lower > est.lower) {
      est.lower = e.lower;
      arg = i;
    }
    est.upper = std::max(est.upper, e.upper);
    est.certified_upper = std::max(est.certified_upper, e.certified_upper);
    est.upper_certified = est.upper_certified && e.upper_certified;
    est.converged = est.converged && e.converged;
    parts.push_back(std::move(e));
  }
  est.method = parts[arg].method;
  est.upper_certified = est.upper == est.certified_upper;
  est.upper_kind = est.upper_certified ? UpperKind::exact : UpperKind::consensus;

  // Embed the winning block's witness into the direct sum coordinates.
  Eigen::VectorXcd w = Eigen::VectorXcd::Zero(out.domain->coord_dim());
  int off = 0;
  for (std::size_t i = 0; i < arg; ++i) off += domains[i]->coord_dim();
  if (parts[arg].witness.size() == domains[arg]->coord_dim())
    w.segment(off, domains[arg]->coord_dim()) = parts[arg].witness;
  est.witness = std::move(w);
  est.upper = std::max(est.upper, est.lower);
  out.estimate = est;
  return out;
}

NormEstimate mixed_scalar_norm(const Eigen::MatrixXcd& M, double p_in,
                               double p_out, const SolverOptions& opts) {
  return opnorm(M, QSLpSpace::lp(static_cast<int>(M.cols()), p_in),
                QSLpSpace::lp(static_cast<int>(M.rows()), p_out), opts);
}

NormEstimate opnorm(const Eigen::MatrixXcd& A, const SpacePtr& domain,
                    const SpacePtr& codomain, const SolverOptions& opts) {
  if (!domain || !codomain) throw SpaceMismatchError("missing space");
  if (A.cols() != domain->coord_dim() || A.rows() != codomain->coord_dim())
    throw ShapeMismatchError("operator shape does not match the spaces");
  const Eigen::Index k = A.cols();

  const bool plain = domain->is_plain() && codomain->is_plain();
  if (!plain) {
    if (domain->p() == 2.0 && codomain->p() == 2.0) {
      NormEstimate est;
      if (hilbert_opnorm(A, domain, codomain, &est))
        return finalize_lower(A, domain, codomain, est);
    }
    // Full-dimensional change of basis reduces to a plain problem.
    if (!domain->has_null() && !codomain->has_null() &&
        domain->coord_dim() == domain->ambient_dim() &&
        codomain->coord_dim() == codomain->ambient_dim()) {
      Eigen::MatrixXcd Aamb =
          codomain->basis() * A *
          domain->basis().partialPivLu().solve(
              Eigen::MatrixXcd::Identity(k, k));
      SolverOptions amb_opts = opts;
      for (auto& s : amb_opts.extra_starts)
        if (s.size() == k) s = domain->basis() * s;
      NormEstimate est = opnorm(Aamb, QSLpSpace::lp(static_cast<int>(k), domain->p()),
                                QSLpSpace::lp(static_cast<int>(A.rows()), codomain->p()),
                                amb_opts);
      if (est.witness.size() == k) {
        Eigen::VectorXcd coords = domain->basis().partialPivLu().solve(est.witness);
        est.witness = coords;
      }
      return finalize_lower(A, domain, codomain, est);
    }
    if (2 * k - 1 <= 6) {
      int res = std::min(opts.bruteforce_resolution,
                         std::max(8, static_cast<int>(std::floor(
                                         std::pow(2e5, 1.0 / std::max(1, static_cast<int>(2 * k - 2)))))));
      return opnorm_bruteforce(A, domain, codomain, res, opts);
    }
    return ascent_multistart(A, domain, codomain, opts, {});
  }

  const double p = domain->p();
  const double q = codomain->p();

  if (k == 1) {
    NormEstimate est;
    est.method = NormMethod::closed_form;
    est.witness = Eigen::VectorXcd::Ones(1);
    est.lower = lp_norm(A.col(0), q);
    est.upper = est.lower;
    est.certified_upper = est.lower;
    est.upper_certified = true;
    est.upper_kind = UpperKind::exact;
    return est;
  }

  if (p == q) {
    double maxabs;
    Eigen::Index argcol;
    if (generalized_permutation(A, &maxabs, &argcol)) {
      NormEstimate est;
      est.method = NormMethod::closed_form;
      est.witness = Eigen::VectorXcd::Unit(k, argcol);
      est.lower = maxabs;
      est.upper = maxabs;
      est.certified_upper = maxabs;
      est.upper_certified = true;
      est.upper_kind = UpperKind::exact;
      return est;
    }
  }

  if (p == 2.0 && q == 2.0) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeThinV);
    NormEstimate est;
    est.method = NormMethod::svd;
    est.lower = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    est.witness = svd.matrixV().col(0);
    est.upper = est.lower;
    est.certified_upper = est.lower;
    est.upper_certified = true;
    est.upper_kind = UpperKind::exact;
    return finalize_lower(A, domain, codomain, est);
  }

  if (2 * k - 1 <= 4) {
    int res = std::min(opts.bruteforce_resolution, 447);
    return opnorm_bruteforce(A, domain, codomain, res, opts);
  }
  return opnorm_boyd(A, p, q, opts);
}

}  // namespace pfa
