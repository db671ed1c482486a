#include "pfa/check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pfa {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::PASS: return "PASS";
    case Verdict::FAIL: return "FAIL";
    case Verdict::INCONCLUSIVE: return "INCONCLUSIVE";
  }
  return "?";
}

CheckOutcome check_equal(const NormEstimate& lhs, const NormEstimate& rhs,
                         double tol, double gate) {
  CheckOutcome out;
  out.relation = "eq";
  out.lhs = lhs;
  out.rhs = rhs;
  out.tolerance = tol;
  out.gap_gate = gate;
  out.discrepancy = lhs.lower - rhs.lower;

  // Certified separation beats any amount of solver slack.
  if (lhs.lower > rhs.upper + tol || rhs.lower > lhs.upper + tol) {
    out.verdict = Verdict::FAIL;
    return out;
  }
  if (lhs.gap() > gate || rhs.gap() > gate) {
    out.verdict = Verdict::INCONCLUSIVE;
    return out;
  }
  out.verdict = std::abs(out.discrepancy) <= tol ? Verdict::PASS : Verdict::FAIL;
  return out;
}

CheckOutcome check_leq(const NormEstimate& lhs, const NormEstimate& rhs,
                       double tol, double gate) {
  CheckOutcome out;
  out.relation = "le";
  out.lhs = lhs;
  out.rhs = rhs;
  out.tolerance = tol;
  out.gap_gate = gate;
  out.discrepancy = lhs.lower - rhs.lower;

  if (lhs.lower <= rhs.lower + tol) {
    out.verdict = Verdict::PASS;
    return out;
  }
  // lhs.lower certifies the true lhs from below, so exceeding the rhs upper
  // bound is a certified violation.
  if (lhs.lower > rhs.upper + tol) {
    out.verdict = Verdict::FAIL;
    return out;
  }
  // The observed values violate but the rhs may be underestimated.
  out.verdict = rhs.gap() > gate ? Verdict::INCONCLUSIVE : Verdict::FAIL;
  return out;
}

namespace {

void merge_provenance(NormEstimate* out, const NormEstimate& a,
                      const NormEstimate& b) {
  out->upper_certified = a.upper_certified && b.upper_certified;
  out->upper_kind = out->upper_certified ? UpperKind::inherited
                                         : UpperKind::consensus;
  out->converged = a.converged && b.converged;
  out->iterations = a.iterations + b.iterations;
}

}  // namespace

NormEstimate max_estimate(const NormEstimate& a, const NormEstimate& b) {
  NormEstimate out;
  out.lower = std::max(a.lower, b.lower);
  out.upper = std::max(a.upper, b.upper);
  out.certified_upper = std::max(a.certified_upper, b.certified_upper);
  out.method = a.lower >= b.lower ? a.method : b.method;
  out.witness = a.lower >= b.lower ? a.witness : b.witness;
  merge_provenance(&out, a, b);
  return out;
}

NormEstimate product_estimate(const NormEstimate& a, const NormEstimate& b) {
  // inf * 0 would poison the bracket with a NaN; an infinite factor means
  // "no bound", and no bound times anything nonnegative is still no bound.
  auto mul = [](double x, double y) {
    if (std::isinf(x) || std::isinf(y))
      return std::numeric_limits<double>::infinity();
    return x * y;
  };
  NormEstimate out;
  out.lower = a.lower * b.lower;
  out.upper = mul(a.upper, b.upper);
  out.certified_upper = mul(a.certified_upper, b.certified_upper);
  out.method = a.method;
  merge_provenance(&out, a, b);
  return out;
}

NormEstimate shifted_estimate(const NormEstimate& a, double delta) {
  NormEstimate out = a;
  out.lower += delta;
  out.upper += delta;
  out.certified_upper += delta;
  return out;
}

NormEstimate scaled_estimate(const NormEstimate& a, double factor) {
  NormEstimate out = a;
  out.lower *= factor;
  out.upper *= factor;
  out.certified_upper *= factor;
  return out;
}

NormEstimate exact_estimate(double value) {
  NormEstimate out;
  out.lower = value;
  out.upper = value;
  out.certified_upper = value;
  out.upper_certified = true;
  out.upper_kind = UpperKind::exact;
  out.method = NormMethod::closed_form;
  return out;
}

}  // namespace pfa
