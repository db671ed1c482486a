#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "pfa/qslp_space.hpp"

namespace pfa {

enum class NormMethod {
  closed_form,
  svd,
  boyd_multistart,
  brute_force,
  riesz_thorin,
};

enum class UpperKind {
  exact,          // closed form or SVD, upper == lower
  riesz_thorin,   // interpolation between 1->1 and inf->inf
  holder_columns, // l_{p'} norm of the vector of column q-norms
  grid_slack,     // brute force grid value times a Lipschitz cushion
  consensus,      // heuristic: many independent starts agree on the value
  inherited,      // majorant supplied by the caller (e.g. restriction)
  none,           // no upper available (reported as infinity)
};

std::string to_string(NormMethod m);
std::string to_string(UpperKind k);

// Two-sided estimate of an operator norm. The lower bound is always
// certified by the witness: evaluating the operator on `witness` reproduces
// `lower`. The upper bound is certified unless `upper_certified` is false,
// in which case it came from solver consensus and is only heuristic.
struct NormEstimate {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  bool upper_certified = false;
  UpperKind upper_kind = UpperKind::none;
  // Tightest upper bound with a proof behind it (infinity when none exists);
  // `upper` may undercut it heuristically via solver consensus.
  double certified_upper = std::numeric_limits<double>::infinity();
  Eigen::VectorXcd witness;  // domain coordinates
  NormMethod method = NormMethod::closed_form;
  int iterations = 0;
  bool converged = true;

  double gap() const { return upper - lower; }
};

struct SolverOptions {
  int starts = 32;              // multistart count (Boyd and ascent)
  int max_iterations = 500;     // per start
  double tolerance = 1e-9;      // relative stagnation tolerance
  int bruteforce_resolution = 60;  // default steps per angle in auto dispatch
  int polish_count = 8;         // grid points polished by local ascent
  std::uint64_t seed = 1;
  QuotientSolveOptions quotient;  // inner quotient-norm solves
  // Caller-supplied warm starts for the multistart solvers, e.g. witnesses
  // carried over from a structurally related problem. Entries whose length
  // does not match the domain are ignored; zero vectors are skipped.
  std::vector<Eigen::VectorXcd> extra_starts;
};

// Norm of A as an operator between two QSL_p spaces, with A acting on
// coordinates. Dispatch: closed forms (generalized permutations, p = 2 via
// SVD, single-column), dense sphere search for tiny dimensions, Boyd-style
// multistart power iteration on plain spaces, projected-gradient multistart
// on subspace/quotient domains.
NormEstimate opnorm(const Eigen::MatrixXcd& A, const SpacePtr& domain,
                    const SpacePtr& codomain, const SolverOptions& opts = {});

// Dense sampling of the unit sphere at `resolution` steps per angle followed
// by local polish. Certified lower bound; the upper bound adds the grid's
// Lipschitz slack (quotient domains get no certified upper). Throws
// DimensionTooLargeError when the real search-sphere dimension exceeds 6.
NormEstimate opnorm_bruteforce(const Eigen::MatrixXcd& A, const SpacePtr& domain,
                               const SpacePtr& codomain, int resolution,
                               const SolverOptions& opts = {});

// Fixed-point iteration x <- dual-map(A^T dual-map(A x)) on plain spaces,
// restarted from `opts.starts` deterministic seeds.
NormEstimate opnorm_boyd(const Eigen::MatrixXcd& A, double p_in, double p_out,
                         const SolverOptions& opts = {});

// max column abs sum ^ (1/p) * max row abs sum ^ (1/p'); valid for square or
// rectangular A acting l_p -> l_p.
double riesz_thorin_upper(const Eigen::MatrixXcd& A, double p);

// Norm of a block-diagonal operator as the sup over blocks. Returns the
// estimate together with the assembled direct-sum domain and codomain.
struct DirectSumNorm {
  NormEstimate estimate;
  SpacePtr domain;
  SpacePtr codomain;
};
DirectSumNorm directsum_opnorm(const std::vector<Eigen::MatrixXcd>& blocks,
                               const std::vector<SpacePtr>& domains,
                               const std::vector<SpacePtr>& codomains,
                               const SolverOptions& opts = {});

// Scalar matrix acting l_{p_in}^m -> l_{p_out}^n.
NormEstimate mixed_scalar_norm(const Eigen::MatrixXcd& M, double p_in,
                               double p_out, const SolverOptions& opts = {});

// ||A c||_codomain / ||c||_domain for a concrete coordinate vector; used to
// verify witnesses and replay records.
double ratio_at(const Eigen::MatrixXcd& A, const SpacePtr& domain,
                const SpacePtr& codomain, const Eigen::VectorXcd& coords);

}  // namespace pfa
