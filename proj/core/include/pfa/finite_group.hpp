#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <vector>

#include "pfa/errors.hpp"
#include "pfa/rng.hpp"

namespace pfa {

// A finite group given by its multiplication table. Elements are the
// indices 0..order-1; table(a, b) is the product a*b. Validation on
// construction checks the Latin square property, a two-sided identity,
// inverses, and associativity (exhaustively up to order 64, sampled above).
class FiniteGroup {
 public:
  static std::shared_ptr<const FiniteGroup> from_table(
      std::vector<std::vector<int>> table);

  int order() const { return order_; }
  int mul(int a, int b) const { return table_[static_cast<std::size_t>(a) *
                                              static_cast<std::size_t>(order_) +
                                              static_cast<std::size_t>(b)]; }
  int inv(int a) const { return inverse_[static_cast<std::size_t>(a)]; }
  int identity() const { return identity_; }
  bool is_abelian() const { return abelian_; }

  bool same_as(const FiniteGroup& other) const {
    return order_ == other.order_ && table_ == other.table_;
  }

  std::uint64_t hash() const { return hash_; }

 private:
  FiniteGroup() = default;

  int order_ = 0;
  int identity_ = 0;
  bool abelian_ = false;
  std::vector<int> table_;    // row-major, order x order
  std::vector<int> inverse_;  // per element
  std::uint64_t hash_ = 0;
};

using GroupPtr = std::shared_ptr<const FiniteGroup>;

// Cyclic group Z_n with addition mod n; element k is the residue k.
GroupPtr cyclic_group(int n);

// Dihedral group of order 2n: elements 0..n-1 are the rotations r^k,
// elements n..2n-1 are the reflections s*r^k.
GroupPtr dihedral_group(int n);

// A complex-valued function on a group, identified with an element of the
// group algebra under counting measure (every point has weight 1).
struct GroupFunction {
  GroupPtr group;
  Eigen::VectorXcd coeffs;

  GroupFunction() = default;
  GroupFunction(GroupPtr g, Eigen::VectorXcd c);

  std::complex<double> operator()(int x) const { return coeffs(x); }
};

// Point mass at x.
GroupFunction delta(const GroupPtr& group, int x);

// Constant function with the given value.
GroupFunction constant(const GroupPtr& group, std::complex<double> value);

// Independent standard complex normal coefficients.
GroupFunction random_function(const GroupPtr& group, CounterRng& rng);

// (f*g)(x) = sum_y f(y) g(y^{-1} x). Throws GroupMismatchError when the two
// functions live on different groups.
GroupFunction convolve(const GroupFunction& f, const GroupFunction& g);

// Integral against counting measure: sum of all values.
std::complex<double> haar_integral(const GroupFunction& f);

// L1 norm under counting measure.
double l1_norm(const GroupFunction& f);

void require_same_group(const GroupFunction& f, const GroupFunction& g);

}  // namespace pfa
