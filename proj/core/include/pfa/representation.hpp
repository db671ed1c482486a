#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "pfa/finite_group.hpp"
#include "pfa/opnorm.hpp"
#include "pfa/qslp_space.hpp"

namespace pfa {

class Representation;
using RepPtr = std::shared_ptr<const Representation>;

// A homomorphism from a finite group into the invertible isometries of a
// QSLpSpace, one coordinate matrix per element. Construction validates the
// homomorphism property (exhaustive pairs up to order 16, sampled above),
// invertibility against the inverse element's matrix, and isometry of every
// matrix in both directions.
class Representation {
 public:
  static RepPtr create(GroupPtr group, SpacePtr space,
                       std::vector<Eigen::MatrixXcd> matrices,
                       const SolverOptions& opts = {});

  const GroupPtr& group() const { return group_; }
  const SpacePtr& space() const { return space_; }
  int dim() const { return space_->coord_dim(); }
  const Eigen::MatrixXcd& matrix(int g) const {
    return matrices_[static_cast<std::size_t>(g)];
  }

  // sum_x f(x) matrix(x); the workhorse behind every norm in the library.
  Eigen::MatrixXcd lift_matrix(const GroupFunction& f) const;

  std::uint64_t hash() const { return hash_; }
  bool same_as(const Representation& other) const;

  // Structural constructions (direct sums, restrictions to invariant
  // subspaces) inherit isometry from their inputs, so they skip the solver
  // passes that `create` runs.
  static RepPtr create_trusted(GroupPtr group, SpacePtr space,
                               std::vector<Eigen::MatrixXcd> matrices);

 private:
  Representation() = default;

  GroupPtr group_;
  SpacePtr space_;
  std::vector<Eigen::MatrixXcd> matrices_;
  std::uint64_t hash_ = 0;
};

// Left regular representation on l_p^{|G|}: permutation matrices moving the
// point mass at x to the point mass at gx.
RepPtr left_regular(const GroupPtr& group, double p);

// One-dimensional representation sending every element to [1].
RepPtr trivial_rep(const GroupPtr& group, double p);

// Permutation representation from a group action on {0..points-1}; `action`
// has one row per group element listing the image of every point.
RepPtr permutation_rep(const GroupPtr& group,
                       const std::vector<std::vector<int>>& action, double p);

RepPtr direct_sum_rep(const std::vector<RepPtr>& parts);

struct LiftedOperator {
  RepPtr rep;
  GroupFunction function;
  Eigen::MatrixXcd matrix;
};

LiftedOperator lift(const RepPtr& rep, const GroupFunction& f);

// Square or rectangular matrix of group functions, the coefficient grid of a
// matrix over the group algebra.
struct GroupFunctionMatrix {
  GroupPtr group;
  int rows = 0;
  int cols = 0;
  std::vector<Eigen::VectorXcd> entries;  // row-major

  const Eigen::VectorXcd& at(int i, int j) const {
    return entries[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols) +
                   static_cast<std::size_t>(j)];
  }
  static GroupFunctionMatrix from_functions(
      const std::vector<std::vector<GroupFunction>>& fs);
  static GroupFunctionMatrix diagonal(const GroupFunction& f, int n);
  static GroupFunctionMatrix random(const GroupPtr& group, int rows, int cols,
                                    CounterRng& rng);
};

// Block matrix [lift(f_ij)] acting between amplifications of the space.
Eigen::MatrixXcd amplified_lift(const RepPtr& rep, const GroupFunctionMatrix& F);

struct CyclicSubrep {
  RepPtr rep;                   // restriction to the orbit span
  Eigen::MatrixXcd inclusion;   // parent coords <- subrep coords
  Eigen::VectorXcd xi_coords;   // generating vector in subrep coordinates
};

// Restriction of `rep` to the span of the orbit of xi (coordinates in the
// rep's space). Throws ZeroVectorError on a numerically zero generator.
CyclicSubrep cyclic_subrep(const RepPtr& rep, const Eigen::VectorXcd& xi);

struct EquivalenceReport {
  bool shape_ok = false;
  bool invertible = false;
  double intertwine_residual = 0.0;
  double amplified_residual = 0.0;  // worst over n = 2, 3
  NormEstimate forward_norm;
  NormEstimate backward_norm;
  bool isometric = false;
  bool equivalent = false;
};

// Checks whether T (codomain coords x domain coords) realizes an isometric
// equivalence between two representations of the same group.
EquivalenceReport equivalence_check(const RepPtr& rep1, const RepPtr& rep2,
                                    const Eigen::MatrixXcd& T,
                                    const SolverOptions& opts = {});

struct DecomposeReport {
  int joint_dim = 0;       // dim of the span generated from x by matrix lifts
  int component_dim = 0;   // dim of the sum of the components' orbit spans
  double residual = 0.0;   // containment defect between the two spans
  bool equal = false;      // joint span == n-fold copy of the component span
};

// For x in the n-fold amplification, compares the invariant subspace
// generated by matrix lifts from x against the n-fold copy of the span of
// the component orbits.
DecomposeReport cyclic_matrix_decompose(const RepPtr& rep, int n,
                                        const Eigen::VectorXcd& x);

}  // namespace pfa
