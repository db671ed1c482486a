#pragma once

#include <complex>
#include <limits>
#include <optional>
#include <vector>

#include "pfa/pseudofunctions.hpp"

namespace pfa {

// A concrete way of writing a coefficient function: u(x) = <matrix(x) xi, eta>
// with xi in the representation space and eta a functional on it.
struct Realization {
  RepPtr rep;
  SpaceVector xi;
  DualVector eta;
};

// Element of the coefficient-function algebra: one complex value per group
// element, optionally carrying a realization that witnesses membership and
// seeds the upper-bound search.
struct BpElement {
  GroupPtr group;
  Eigen::VectorXcd values;
  std::optional<Realization> realization;
};

BpElement bp_from_values(GroupPtr group, Eigen::VectorXcd values);

// Builds u(x) = <matrix(x) xi, eta> and attaches the realization.
BpElement coefficient_function(const RepPtr& rep, const SpaceVector& xi,
                               const DualVector& eta);

// Pointwise product; realizations are dropped (the product's realization
// lives on a tensor construction this library does not build).
BpElement pointwise_product(const BpElement& u, const BpElement& v);

// Bilinear pairing sum_x f(x) u(x).
std::complex<double> pairing(const GroupFunction& f, const BpElement& u);

// |pairing via values - pairing via the realization|; zero (to rounding)
// whenever the realization is consistent.
double pairing_realization_residual(const GroupFunction& f, const BpElement& u);

// Certified lower bound for the dual norm: the best ratio
// |<f,u>| / ||Pi(f)|| found by multistart ascent. `value` divides by the
// tightest upper bound for the denominator (possibly heuristic consensus);
// `certified` divides by the proven upper bound and can be much smaller
// when no proof is available. `unbounded` is set when u pairs nontrivially
// with the family's null ideal, so no finite bound exists.
struct BpLower {
  double value = 0.0;
  double certified = 0.0;
  GroupFunction witness;
  NormEstimate witness_norm;              // ||Pi(witness)||
  std::complex<double> pairing_value{0.0};
  bool unbounded = false;
  Eigen::VectorXcd violation;             // null-ideal direction, when unbounded
  int iterations = 0;
};
BpLower bp_norm_lower(const UniversalFamily& family, const BpElement& u,
                      const SolverOptions& opts = {});

// Upper bound from an explicit realization u = sum_k u_{xi_k, eta_k} over a
// direct sum of at most three candidate representations: for fixed xi the
// interpolation constraints are linear in eta, and the outer search walks xi
// over the unit sphere. Infeasible when no candidate subset can interpolate.
struct BpUpper {
  double value = std::numeric_limits<double>::infinity();
  bool feasible = false;
  RepPtr rep;                  // the (direct-sum) rep realizing the bound
  Eigen::VectorXcd xi_coords;
  Eigen::VectorXcd eta_ambient;
  double residual = 0.0;       // interpolation residual of the returned pair
  int iterations = 0;
};
BpUpper bp_norm_upper(const BpElement& u, const std::vector<RepPtr>& candidates,
                      const SolverOptions& opts = {});

struct BpBracket {
  BpLower lower;
  BpUpper upper;
};
BpBracket bp_norm_bracket(const UniversalFamily& family, const BpElement& u,
                          const std::vector<RepPtr>& candidates,
                          const SolverOptions& opts = {});

// Matrix-level lower bound via scalar compressions: for each n up to n_max,
// ascends over arrays [f_st] of the ratio
//   ||C(f)||_{p->p} / ||[Pi(f_st)]||,
// where C is the (n m) x (n m) matrix of pairings <pi(f_st), u_ij>.
struct BpMatrixLevel {
  int n = 0;
  NormEstimate estimate;
  std::vector<Eigen::VectorXcd> witness_array;  // row-major f_st coefficients
  // Denominator bound the winning ratio was normalized by, for replays.
  double family_upper = std::numeric_limits<double>::infinity();
};
struct BpMatrixReport {
  std::vector<BpMatrixLevel> levels;  // n = 1 .. n_max
  double best = 0.0;
  int best_n = 0;
};
BpMatrixReport bp_matrix_norm(const UniversalFamily& family,
                              const std::vector<std::vector<BpElement>>& U,
                              int n_max, const SolverOptions& opts = {});

// Functional flatness: the matrix levels of a single u must all equal the
// first level. Levels are compared pairwise against n = 1.
struct CbReport {
  std::vector<BpMatrixLevel> levels;
  std::vector<CheckOutcome> outcomes;  // level n vs level 1, n >= 2
  bool any_fail = false;
};
CbReport cb_functional_check(const UniversalFamily& family, const BpElement& u,
                             int n_max, double tol = kGapGate,
                             const SolverOptions& opts = {});

// Exact dual norm for finite abelian groups when the exponent is 2: the sum
// of absolute Fourier coefficients over the character table. Characters are
// recovered as joint eigenvectors of a generic group-algebra element and
// verified multiplicatively. Throws NotAbelianError otherwise.
double fourier_oracle_p2(const BpElement& u);

// Duality direction of the embedding: a functional phi on the lift image
// (given as a matrix pairing T -> sum_ij T_ij phi_ij) determines the
// coefficient function u(x) = phi(matrix(x)), and the dual norm of u never
// exceeds the operator norm of phi on the base representation.
struct DualityReport {
  BpElement u;
  NormEstimate phi_norm;  // sup |<f,u>| / ||pi(f)|| over the base rep
  BpLower u_lower;
  CheckOutcome outcome;   // u_lower <= phi_norm + tol
};
DualityReport duality_contractivity_check(const UniversalFamily& family,
                                          const Eigen::MatrixXcd& phi,
                                          const SolverOptions& opts = {});

}  // namespace pfa
