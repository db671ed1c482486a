#pragma once

#include <string>

#include "pfa/opnorm.hpp"

namespace pfa {

enum class Verdict { PASS, FAIL, INCONCLUSIVE };

const char* to_string(Verdict v);

// Default tolerances for theorem checks. Equality of two solver estimates is
// judged on their certified lower bounds, and only when both estimates are
// tight enough (gap below the gate) to rule out solver slack.
inline constexpr double kEqTol = 5e-5;
inline constexpr double kGapGate = 1e-3;

struct CheckOutcome {
  Verdict verdict = Verdict::INCONCLUSIVE;
  std::string relation;   // "eq" or "le"
  NormEstimate lhs;
  NormEstimate rhs;
  double tolerance = kEqTol;
  double gap_gate = kGapGate;
  double discrepancy = 0.0;  // signed: lhs.lower - rhs.lower
};

// Equality check. FAIL only on a certified separation (disjoint brackets
// beyond tol); INCONCLUSIVE when either side is too loose to judge.
CheckOutcome check_equal(const NormEstimate& lhs, const NormEstimate& rhs,
                         double tol = kEqTol, double gate = kGapGate);

// One-sided check lhs <= rhs + tol. A violation of the observed values FAILs
// only when the rhs estimate is tight; a loose rhs yields INCONCLUSIVE.
CheckOutcome check_leq(const NormEstimate& lhs, const NormEstimate& rhs,
                       double tol = kEqTol, double gate = kGapGate);

// Bracket arithmetic for derived quantities. Each returns an estimate whose
// [lower, upper] interval contains the derived true value; witnesses are not
// propagated (the inputs keep theirs).
NormEstimate max_estimate(const NormEstimate& a, const NormEstimate& b);
NormEstimate product_estimate(const NormEstimate& a, const NormEstimate& b);
NormEstimate shifted_estimate(const NormEstimate& a, double delta);
NormEstimate scaled_estimate(const NormEstimate& a, double factor);
NormEstimate exact_estimate(double value);

}  // namespace pfa
