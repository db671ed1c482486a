#include "pfa/pseudofunctions.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>
#include <utility>

namespace pfa {

namespace {

// alpha (x) I_k: scalar matrices act blockwise on amplifications.
Eigen::MatrixXcd kron_identity(const Eigen::MatrixXcd& scalar, int k) {
  Eigen::MatrixXcd out =
      Eigen::MatrixXcd::Zero(scalar.rows() * k, scalar.cols() * k);
  for (Eigen::Index i = 0; i < scalar.rows(); ++i)
    for (Eigen::Index j = 0; j < scalar.cols(); ++j)
      if (scalar(i, j) != std::complex<double>(0.0))
        out.block(i * k, j * k, k, k) =
            scalar(i, j) * Eigen::MatrixXcd::Identity(k, k);
  return out;
}

void require_square(const GroupFunctionMatrix& F) {
  if (F.rows != F.cols || F.rows < 1)
    throw ShapeMismatchError("matrix norm needs a square nonempty array");
}

// Lift and solve space for one side of a matrix pf-norm problem; mirrors the
// dispatch inside matrix_pf_norm so witnesses can be re-evaluated in place.
struct LiftedArray {
  Eigen::MatrixXcd L;
  SpacePtr space;
};

LiftedArray lifted_array(const RepPtr& rep, const GroupFunctionMatrix& F) {
  if (F.rows == 1)
    return {rep->lift_matrix(GroupFunction{rep->group(), F.at(0, 0)}),
            rep->space()};
  return {amplified_lift(rep, F), amplify_space(rep->space(), F.rows)};
}

// Adopt a witness found by a structurally related solve when it beats the
// current lower bound. A heuristic upper the new value disproves moves up
// with it; certified uppers stay put, keeping genuine contradictions visible.
void adopt_witness(NormEstimate* est, double value, Eigen::VectorXcd coords) {
  if (!(value > est->lower)) return;
  est->lower = value;
  est->witness = std::move(coords);
  if (!est->upper_certified && est->upper < value) est->upper = value;
}

}  // namespace

NormEstimate pf_norm(const RepPtr& rep, const GroupFunction& f,
                     const SolverOptions& opts) {
  Eigen::MatrixXcd L = rep->lift_matrix(f);
  return opnorm(L, rep->space(), rep->space(), opts);
}

Eigen::MatrixXcd null_ideal(const RepPtr& rep) {
  const int n = rep->group()->order();
  const int k = rep->dim();
  Eigen::MatrixXcd A(static_cast<Eigen::Index>(k) * k, n);
  for (int x = 0; x < n; ++x) {
    const Eigen::MatrixXcd& M = rep->matrix(x);
    A.col(x) = Eigen::Map<const Eigen::VectorXcd>(
        M.data(), static_cast<Eigen::Index>(k) * k);
  }
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(A);
  lu.setThreshold(1e-10);
  if (lu.rank() == n) return Eigen::MatrixXcd(n, 0);
  return lu.kernel();
}

NormEstimate matrix_pf_norm(const RepPtr& rep, const GroupFunctionMatrix& F,
                            const SolverOptions& opts) {
  require_square(F);
  if (F.rows == 1)
    return pf_norm(rep, GroupFunction{rep->group(), F.at(0, 0)}, opts);
  Eigen::MatrixXcd L = amplified_lift(rep, F);
  SpacePtr amp = amplify_space(rep->space(), F.rows);
  return opnorm(L, amp, amp, opts);
}

GroupFunctionMatrix array_direct_sum(const GroupFunctionMatrix& U,
                                     const GroupFunctionMatrix& V) {
  require_square(U);
  require_square(V);
  if (!U.group->same_as(*V.group))
    throw GroupMismatchError("direct sum of arrays over different groups");
  GroupFunctionMatrix W;
  W.group = U.group;
  W.rows = W.cols = U.rows + V.rows;
  const Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(U.group->order());
  for (int i = 0; i < W.rows; ++i)
    for (int j = 0; j < W.cols; ++j) {
      if (i < U.rows && j < U.cols)
        W.entries.push_back(U.at(i, j));
      else if (i >= U.rows && j >= U.cols)
        W.entries.push_back(V.at(i - U.rows, j - U.cols));
      else
        W.entries.push_back(zero);
    }
  return W;
}

DinfReport axiom_check_dinf(const RepPtr& rep, const GroupFunctionMatrix& U,
                            const GroupFunctionMatrix& V,
                            const SolverOptions& opts) {
  require_square(U);
  require_square(V);
  DinfReport out;
  out.u_norm = matrix_pf_norm(rep, U, opts);
  out.v_norm = matrix_pf_norm(rep, V, opts);

  const GroupFunctionMatrix W = array_direct_sum(U, V);
  const Eigen::Index k = rep->dim();
  const Eigen::Index du = static_cast<Eigen::Index>(U.rows) * k;
  const Eigen::Index dv = static_cast<Eigen::Index>(V.rows) * k;

  // The three solves exchange witnesses: block witnesses embed into their
  // slots of the joined problem with the same ratio, and the joined witness
  // restricts to the blocks with at least its ratio on one of them. A solver
  // undershoot on either side then shows up as agreement instead of a
  // spurious separation.
  SolverOptions sum_opts = opts;
  if (out.u_norm.witness.size() == du) {
    Eigen::VectorXcd eu = Eigen::VectorXcd::Zero(du + dv);
    eu.head(du) = out.u_norm.witness;
    sum_opts.extra_starts.push_back(std::move(eu));
  }
  if (out.v_norm.witness.size() == dv) {
    Eigen::VectorXcd ev = Eigen::VectorXcd::Zero(du + dv);
    ev.tail(dv) = out.v_norm.witness;
    sum_opts.extra_starts.push_back(std::move(ev));
  }
  out.sum_norm = matrix_pf_norm(rep, W, sum_opts);

  if (out.sum_norm.witness.size() == du + dv) {
    LiftedArray lu = lifted_array(rep, U);
    LiftedArray lv = lifted_array(rep, V);
    Eigen::VectorXcd xu = out.sum_norm.witness.head(du);
    Eigen::VectorXcd xv = out.sum_norm.witness.tail(dv);
    if (xu.norm() > 0.0)
      adopt_witness(&out.u_norm, ratio_at(lu.L, lu.space, lu.space, xu), xu);
    if (xv.norm() > 0.0)
      adopt_witness(&out.v_norm, ratio_at(lv.L, lv.space, lv.space, xv), xv);
  }
  if (std::max(out.u_norm.lower, out.v_norm.lower) > out.sum_norm.lower) {
    const bool u_leads = out.u_norm.lower >= out.v_norm.lower;
    const NormEstimate& lead = u_leads ? out.u_norm : out.v_norm;
    const Eigen::Index off = u_leads ? 0 : du;
    const Eigen::Index len = u_leads ? du : dv;
    if (lead.witness.size() == len) {
      Eigen::VectorXcd emb = Eigen::VectorXcd::Zero(du + dv);
      emb.segment(off, len) = lead.witness;
      LiftedArray lw = lifted_array(rep, W);
      adopt_witness(&out.sum_norm, ratio_at(lw.L, lw.space, lw.space, emb),
                    emb);
    }
  }

  out.outcome = check_equal(out.sum_norm, max_estimate(out.u_norm, out.v_norm));
  return out;
}

MpReport axiom_check_mp(const RepPtr& rep, const GroupFunctionMatrix& U,
                        const Eigen::MatrixXcd& alpha,
                        const Eigen::MatrixXcd& beta,
                        const SolverOptions& opts) {
  require_square(U);
  const int m = U.rows;
  if (alpha.cols() != m || beta.rows() != m || alpha.rows() != beta.cols() ||
      alpha.rows() < 1)
    throw ShapeMismatchError("scalar compressions do not fit the array");
  const int n = static_cast<int>(alpha.rows());
  const int k = rep->dim();
  const double p = rep->space()->p();

  MpReport out;
  out.alpha_norm = mixed_scalar_norm(alpha, p, p, opts);
  out.beta_norm = mixed_scalar_norm(beta, p, p, opts);

  Eigen::MatrixXcd L = amplified_lift(rep, U);
  Eigen::MatrixXcd Kb = kron_identity(beta, k);
  Eigen::MatrixXcd C = kron_identity(alpha, k) * L * Kb;
  SpacePtr amp = amplify_space(rep->space(), n);
  out.compressed = opnorm(C, amp, amp, opts);

  // Factor-chain exchange: pushing the compressed witness through beta seeds
  // the uncompressed solve, and its ratio there is an honest lower bound. An
  // undershoot on ||U|| therefore cannot masquerade as a violation of the
  // product bound.
  SolverOptions u_opts = opts;
  Eigen::VectorXcd y;
  if (out.compressed.witness.size() == C.cols()) {
    y = Kb * out.compressed.witness;
    if (y.norm() > 0.0) u_opts.extra_starts.push_back(y);
  }
  out.u_norm = matrix_pf_norm(rep, U, u_opts);
  if (y.size() > 0 && y.norm() > 0.0) {
    LiftedArray lu = lifted_array(rep, U);
    adopt_witness(&out.u_norm, ratio_at(lu.L, lu.space, lu.space, y), y);
  }

  NormEstimate bound = product_estimate(
      product_estimate(out.alpha_norm, out.u_norm), out.beta_norm);
  out.outcome = check_leq(out.compressed, bound);
  return out;
}

UniversalFamily build_universal_family(const RepPtr& rep,
                                       const std::vector<GroupFunction>& probes,
                                       int r_max, const SolverOptions& opts) {
  if (probes.empty())
    throw ConfigError("universal family needs at least one probe");
  if (r_max < 1) throw ConfigError("r_max must be at least 1");

  UniversalFamily fam;
  fam.base = rep;
  fam.probes = probes;
  fam.r_max = r_max;

  std::unordered_map<std::uint64_t, int> piece_by_space;
  for (const auto& probe : probes) {
    NormEstimate est = pf_norm(rep, probe, opts);
    Eigen::VectorXcd w = est.witness;
    if (w.size() != rep->dim() || w.norm() <= 1e-14) {
      // Zero lift (the probe sits in the null ideal): any generator works
      // and the obligation is vacuous since the norm is zero.
      w = Eigen::VectorXcd::Unit(rep->dim(), 0);
    }
    CyclicSubrep piece = cyclic_subrep(rep, w);

    SpaceVector xiv{piece.rep->space(), piece.xi_coords};
    Eigen::VectorXcd xi = piece.xi_coords / vector_norm(xiv);
    Eigen::MatrixXcd Lp = piece.rep->lift_matrix(probe);
    double achieved =
        ratio_at(Lp, piece.rep->space(), piece.rep->space(), xi);

    int idx;
    auto it = piece_by_space.find(piece.rep->space()->hash());
    if (it != piece_by_space.end()) {
      idx = it->second;
    } else {
      idx = static_cast<int>(fam.compute_reps.size());
      fam.compute_reps.push_back(piece.rep);
      fam.inclusions.push_back(piece.inclusion);
      piece_by_space.emplace(piece.rep->space()->hash(), idx);
    }

    const double best_known =
        std::isfinite(est.upper) ? est.upper : est.lower;
    for (int r = 1; r <= r_max; ++r) {
      FamilyPiece rec;
      rec.probe = probe;
      rec.depth = r;
      rec.compute_index = idx;
      rec.xi = xi;
      rec.base_norm = est.lower;
      rec.achieved = achieved;
      rec.required = best_known - 1.0 / r;
      rec.deficit = std::max(0.0, rec.required - achieved);
      rec.witness_ok = achieved > rec.required;
      fam.worst_deficit = std::max(fam.worst_deficit, rec.deficit);
      fam.pieces.push_back(std::move(rec));
    }
  }
  fam.assembled = direct_sum_rep(fam.compute_reps);
  return fam;
}

NormEstimate family_norm(const UniversalFamily& family, const GroupFunction& f,
                         const SolverOptions& opts) {
  std::vector<Eigen::MatrixXcd> blocks;
  std::vector<SpacePtr> spaces;
  blocks.reserve(family.compute_reps.size());
  spaces.reserve(family.compute_reps.size());
  for (const auto& piece : family.compute_reps) {
    blocks.push_back(piece->lift_matrix(f));
    spaces.push_back(piece->space());
  }
  return directsum_opnorm(blocks, spaces, spaces, opts).estimate;
}

NormEstimate family_matrix_norm(const UniversalFamily& family,
                                const GroupFunctionMatrix& F,
                                const SolverOptions& opts) {
  require_square(F);
  std::vector<Eigen::MatrixXcd> blocks;
  std::vector<SpacePtr> spaces;
  blocks.reserve(family.compute_reps.size());
  spaces.reserve(family.compute_reps.size());
  for (const auto& piece : family.compute_reps) {
    blocks.push_back(amplified_lift(piece, F));
    spaces.push_back(amplify_space(piece->space(), F.rows));
  }
  return directsum_opnorm(blocks, spaces, spaces, opts).estimate;
}

std::vector<GapReport> pi_isometry_gap(const UniversalFamily& family,
                                       const std::vector<GroupFunction>& tests,
                                       const SolverOptions& opts) {
  std::vector<GapReport> out;
  out.reserve(tests.size());
  for (const auto& f : tests) {
    GapReport rep;
    rep.f = f;
    rep.base = pf_norm(family.base, f, opts);
    rep.family = family_norm(family, f, opts);
    rep.gap = rep.base.lower - rep.family.lower;
    rep.never_exceeds = check_leq(rep.family, rep.base);
    out.push_back(std::move(rep));
  }
  return out;
}

AmplifiedIsometryReport amplified_isometry_check(const UniversalFamily& family,
                                                 const GroupFunctionMatrix& F,
                                                 double tol,
                                                 const SolverOptions& opts) {
  AmplifiedIsometryReport out;
  out.base = matrix_pf_norm(family.base, F, opts);
  out.family = family_matrix_norm(family, F, opts);
  out.gap = out.base.lower - out.family.lower;
  out.never_exceeds = check_leq(out.family, out.base);
  const double shift = family.truncation() + family.worst_deficit;
  out.truncation_bound =
      check_leq(out.base, shifted_estimate(out.family, shift), tol);
  return out;
}

RestrictionReport restriction_pcb_check(
    const RepPtr& rep_big, const RepPtr& rep_sub,
    const std::vector<GroupFunctionMatrix>& arrays, const SolverOptions& opts) {
  if (!rep_big->group()->same_as(*rep_sub->group()))
    throw GroupMismatchError("restriction check requires one common group");

  // When the sub space factors through the big basis (the subrepresentation
  // was carved out of the big coordinate space), sub witnesses transport
  // slot-by-slot into the big solve with their ratio preserved. That keeps a
  // big-side undershoot from presenting as a monotonicity violation.
  Eigen::MatrixXcd inc;
  {
    const SpacePtr& bsp = rep_big->space();
    const SpacePtr& ssp = rep_sub->space();
    if (!ssp->is_plain() && ssp->ambient_dim() == bsp->ambient_dim()) {
      Eigen::MatrixXcd bb = bsp->basis();
      Eigen::MatrixXcd sb = ssp->basis();
      Eigen::MatrixXcd cand =
          bb.completeOrthogonalDecomposition().solve(sb);
      if ((bb * cand - sb).norm() <= 1e-8 * std::max(1.0, sb.norm()))
        inc = std::move(cand);
    } else if (ssp->is_plain() && bsp->is_plain() &&
               ssp->coord_dim() == bsp->coord_dim()) {
      inc = Eigen::MatrixXcd::Identity(bsp->coord_dim(), bsp->coord_dim());
    }
  }

  RestrictionReport out;
  out.outcomes.reserve(arrays.size());
  for (const auto& F : arrays) {
    NormEstimate sub = matrix_pf_norm(rep_sub, F, opts);
    SolverOptions big_opts = opts;
    Eigen::VectorXcd embedded;
    if (inc.size() > 0 &&
        sub.witness.size() == static_cast<Eigen::Index>(F.rows) * inc.cols()) {
      embedded.resize(static_cast<Eigen::Index>(F.rows) * inc.rows());
      for (int s = 0; s < F.rows; ++s)
        embedded.segment(static_cast<Eigen::Index>(s) * inc.rows(),
                         inc.rows()) =
            inc * sub.witness.segment(
                      static_cast<Eigen::Index>(s) * inc.cols(), inc.cols());
      if (embedded.norm() > 0.0) big_opts.extra_starts.push_back(embedded);
    }
    NormEstimate big = matrix_pf_norm(rep_big, F, big_opts);
    if (embedded.size() > 0 && embedded.norm() > 0.0) {
      LiftedArray lb = lifted_array(rep_big, F);
      adopt_witness(&big, ratio_at(lb.L, lb.space, lb.space, embedded),
                    embedded);
    }
    CheckOutcome oc = check_leq(sub, big);
    out.any_fail = out.any_fail || oc.verdict == Verdict::FAIL;
    out.outcomes.push_back(std::move(oc));
  }
  return out;
}

IndependenceReport universal_independence_check(const UniversalFamily& a,
                                                const UniversalFamily& b,
                                                const GroupFunctionMatrix& F,
                                                const SolverOptions& opts) {
  IndependenceReport out;
  out.a_norm = family_matrix_norm(a, F, opts);
  out.b_norm = family_matrix_norm(b, F, opts);
  out.combined_tolerance = a.truncation() + b.truncation() + a.worst_deficit +
                           b.worst_deficit + kEqTol;
  const double diff = std::abs(out.a_norm.lower - out.b_norm.lower);
  out.verdict =
      diff <= out.combined_tolerance ? Verdict::PASS : Verdict::INCONCLUSIVE;
  return out;
}

SupFormulaReport pf_norm_cyclic_crosscheck(const RepPtr& rep,
                                           const GroupFunction& f,
                                           const SolverOptions& opts) {
  SupFormulaReport out;
  out.direct = pf_norm(rep, f, opts);

  std::vector<Eigen::VectorXcd> gens;
  if (out.direct.witness.size() == rep->dim() &&
      out.direct.witness.norm() > 1e-14)
    gens.push_back(out.direct.witness);
  for (int i = 0; i < rep->dim(); ++i)
    gens.push_back(Eigen::VectorXcd::Unit(rep->dim(), i));

  std::unordered_set<std::uint64_t> seen;
  NormEstimate sup;
  bool first = true;
  for (const auto& g : gens) {
    CyclicSubrep piece = cyclic_subrep(rep, g);
    if (!seen.insert(piece.rep->space()->hash()).second) continue;
    NormEstimate est = pf_norm(piece.rep, f, opts);
    sup = first ? est : max_estimate(sup, est);
    first = false;
  }
  out.cyclic_sup = sup;
  out.outcome = check_equal(out.direct, out.cyclic_sup);
  return out;
}

}  // namespace pfa
