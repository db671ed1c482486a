#pragma once

#include <vector>

#include "pfa/check.hpp"
#include "pfa/representation.hpp"

namespace pfa {

// Element of the pseudofunction algebra attached to a representation: a
// group function normed through its lift.
struct PFElement {
  RepPtr rep;
  GroupFunction f;
  Eigen::MatrixXcd lifted;

  PFElement(RepPtr r, GroupFunction fn)
      : rep(std::move(r)), f(std::move(fn)), lifted(rep->lift_matrix(f)) {}
};

// Operator norm of the lift of f on the representation space.
NormEstimate pf_norm(const RepPtr& rep, const GroupFunction& f,
                     const SolverOptions& opts = {});

// Basis (columns, length = group order) of the kernel of the lift map.
// Functions in this kernel act as zero, so the algebra norms only see the
// coset of f modulo this space. Empty (order x 0) when the lift is injective.
Eigen::MatrixXcd null_ideal(const RepPtr& rep);

// Norm of the block matrix [lift(f_ij)] on the amplified space.
NormEstimate matrix_pf_norm(const RepPtr& rep, const GroupFunctionMatrix& F,
                            const SolverOptions& opts = {});

// Block-diagonal join of two square coefficient arrays, zero off-diagonal.
GroupFunctionMatrix array_direct_sum(const GroupFunctionMatrix& U,
                                     const GroupFunctionMatrix& V);

// Direct-sum axiom: the norm of U (+) V on the joined amplification must be
// the max of the two block norms.
struct DinfReport {
  NormEstimate u_norm;
  NormEstimate v_norm;
  NormEstimate sum_norm;
  CheckOutcome outcome;
};
DinfReport axiom_check_dinf(const RepPtr& rep, const GroupFunctionMatrix& U,
                            const GroupFunctionMatrix& V,
                            const SolverOptions& opts = {});

// Scalar-compression axiom: ||alpha U beta|| <= ||alpha|| ||U|| ||beta||,
// with alpha (n x m) and beta (m x n) acting blockwise on the amplification.
struct MpReport {
  NormEstimate compressed;
  NormEstimate alpha_norm;
  NormEstimate u_norm;
  NormEstimate beta_norm;
  CheckOutcome outcome;
};
MpReport axiom_check_mp(const RepPtr& rep, const GroupFunctionMatrix& U,
                        const Eigen::MatrixXcd& alpha,
                        const Eigen::MatrixXcd& beta,
                        const SolverOptions& opts = {});

// One cyclic block of the truncated universal construction, generated from a
// near-maximizing vector for one probe at one depth. The construction
// obliges ||pi_piece(g) xi|| > ||pi(g)|| - 1/depth with ||xi|| <= 1; when the
// solver witness misses that bound, `deficit` records by how much and
// downstream checks widen their tolerance accordingly.
struct FamilyPiece {
  GroupFunction probe;
  int depth = 0;
  int compute_index = -1;      // index into UniversalFamily::compute_reps
  Eigen::VectorXcd xi;         // generator in piece coordinates, unit norm
  double base_norm = 0.0;      // best known value of ||pi(probe)||
  double achieved = 0.0;       // ratio realized by the stored witness
  double required = 0.0;       // base upper bound - 1/depth
  double deficit = 0.0;        // max(0, required - achieved)
  bool witness_ok = true;
};

// Finite truncation of the universal direct sum: one block per
// (probe, depth) pair up to depth r_max. Blocks sharing the same cyclic
// subspace are collapsed into one compute representation, which leaves every
// norm unchanged (block-diagonal norms are maxima over distinct blocks).
struct UniversalFamily {
  RepPtr base;
  std::vector<GroupFunction> probes;
  int r_max = 1;
  std::vector<FamilyPiece> pieces;
  std::vector<RepPtr> compute_reps;
  std::vector<Eigen::MatrixXcd> inclusions;  // base coords <- piece coords
  RepPtr assembled;                          // direct sum of compute_reps
  double worst_deficit = 0.0;

  double truncation() const { return 1.0 / static_cast<double>(r_max); }
};

// Builds the family over a null-free base representation: for each probe the
// lift norm is solved once, the witness is normalized and its cyclic
// subrepresentation extracted, and the per-depth obligations are recorded.
UniversalFamily build_universal_family(const RepPtr& rep,
                                       const std::vector<GroupFunction>& probes,
                                       int r_max,
                                       const SolverOptions& opts = {});

// ||Pi(f)||: block-diagonal lift norm, the max over the family's blocks.
NormEstimate family_norm(const UniversalFamily& family, const GroupFunction& f,
                         const SolverOptions& opts = {});

// ||[Pi(f_ij)]||: the amplified direct sum is a coordinate permutation of
// the direct sum of amplifications, so again a max over blocks.
NormEstimate family_matrix_norm(const UniversalFamily& family,
                                const GroupFunctionMatrix& F,
                                const SolverOptions& opts = {});

// Per-function comparison of the base norm against the family norm. The
// family never exceeds the base (every block is a restriction); for probe
// functions the gap is bounded by the construction depth.
struct GapReport {
  GroupFunction f;
  NormEstimate base;
  NormEstimate family;
  double gap = 0.0;          // base.lower - family.lower
  CheckOutcome never_exceeds;  // family <= base + tol
};
std::vector<GapReport> pi_isometry_gap(const UniversalFamily& family,
                                       const std::vector<GroupFunction>& tests,
                                       const SolverOptions& opts = {});

// Matrix-level comparison: ||[Pi(f_ij)]|| <= ||[pi(f_ij)]|| always, and when
// the entries come from the probe set the reverse holds up to the truncation
// term plus any recorded witness deficit.
struct AmplifiedIsometryReport {
  NormEstimate base;
  NormEstimate family;
  double gap = 0.0;
  CheckOutcome never_exceeds;   // family <= base + tol
  CheckOutcome truncation_bound;  // base <= family + 1/r_max + deficit + tol
};
AmplifiedIsometryReport amplified_isometry_check(const UniversalFamily& family,
                                                 const GroupFunctionMatrix& F,
                                                 double tol = kGapGate,
                                                 const SolverOptions& opts = {});

// Restriction monotonicity at matrix level: a subrepresentation's norms
// never exceed the parent's, for every supplied array.
struct RestrictionReport {
  std::vector<CheckOutcome> outcomes;
  bool any_fail = false;
};
RestrictionReport restriction_pcb_check(
    const RepPtr& rep_big, const RepPtr& rep_sub,
    const std::vector<GroupFunctionMatrix>& arrays,
    const SolverOptions& opts = {});

// Two truncated families built over the same group must agree on matrix
// norms up to their combined truncation budgets; disagreement beyond that is
// attributed to truncation, never reported as FAIL.
struct IndependenceReport {
  NormEstimate a_norm;
  NormEstimate b_norm;
  double combined_tolerance = 0.0;
  Verdict verdict = Verdict::INCONCLUSIVE;
};
IndependenceReport universal_independence_check(const UniversalFamily& a,
                                                const UniversalFamily& b,
                                                const GroupFunctionMatrix& F,
                                                const SolverOptions& opts = {});

// Cross-check of pf_norm against the sup over cyclic subrepresentations
// generated from the solver witness plus a coordinate basis. The witness
// block attains the full norm, so the sup matches the direct computation.
struct SupFormulaReport {
  NormEstimate direct;
  NormEstimate cyclic_sup;
  CheckOutcome outcome;
};
SupFormulaReport pf_norm_cyclic_crosscheck(const RepPtr& rep,
                                           const GroupFunction& f,
                                           const SolverOptions& opts = {});

}  // namespace pfa
