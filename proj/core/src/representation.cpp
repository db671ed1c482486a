#include "pfa/representation.hpp"

#include <cmath>
#include <utility>

namespace pfa {

namespace {

double max_abs(const Eigen::MatrixXcd& M) {
  return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff();
}

std::uint64_t rep_hash(const GroupPtr& group, const SpacePtr& space,
                       const std::vector<Eigen::MatrixXcd>& mats) {
  Hasher h;
  h.u64(group->hash()).u64(space->hash());
  for (const auto& M : mats)
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      for (Eigen::Index i = 0; i < M.rows(); ++i) h.c128(M(i, j));
  return h.digest();
}

void validate_structure(const GroupPtr& group, const SpacePtr& space,
                        const std::vector<Eigen::MatrixXcd>& mats) {
  if (!group || !space) throw NotARepresentationError("missing group or space");
  const int n = group->order();
  const int k = space->coord_dim();
  if (static_cast<int>(mats.size()) != n)
    throw NotARepresentationError("one matrix per group element required");
  for (const auto& M : mats)
    if (M.rows() != k || M.cols() != k)
      throw NotARepresentationError("matrix size does not match the space");
}

}  // namespace

RepPtr Representation::create_trusted(GroupPtr group, SpacePtr space,
                                      std::vector<Eigen::MatrixXcd> matrices) {
  validate_structure(group, space, matrices);
  auto rep = std::shared_ptr<Representation>(new Representation());
  rep->group_ = std::move(group);
  rep->space_ = std::move(space);
  rep->matrices_ = std::move(matrices);
  rep->hash_ = rep_hash(rep->group_, rep->space_, rep->matrices_);
  return rep;
}

RepPtr Representation::create(GroupPtr group, SpacePtr space,
                              std::vector<Eigen::MatrixXcd> matrices,
                              const SolverOptions& opts) {
  validate_structure(group, space, matrices);
  const int n = group->order();
  const int k = space->coord_dim();
  double scale = 1.0;
  for (const auto& M : matrices) scale = std::max(scale, max_abs(M));

  // Homomorphism: exhaustive up to order 16, sampled pairs above.
  auto check_pair = [&](int a, int b) {
    const Eigen::MatrixXcd& Ma = matrices[static_cast<std::size_t>(a)];
    const Eigen::MatrixXcd& Mb = matrices[static_cast<std::size_t>(b)];
    const Eigen::MatrixXcd& Mab =
        matrices[static_cast<std::size_t>(group->mul(a, b))];
    if (max_abs(Ma * Mb - Mab) > 1e-9 * scale * scale)
      throw NotARepresentationError("matrices do not compose along the group");
  };
  if (n <= 16) {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) check_pair(a, b);
  } else {
    CounterRng rng(0x9e5u, group->hash());
    for (int t = 0; t < 256; ++t)
      check_pair(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n))),
                 static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n))));
  }

  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(k, k);
  for (int g = 0; g < n; ++g) {
    const Eigen::MatrixXcd& M = matrices[static_cast<std::size_t>(g)];
    const Eigen::MatrixXcd& Minv = matrices[static_cast<std::size_t>(group->inv(g))];
    if (max_abs(M * Minv - id) > 1e-9 * scale * scale)
      throw NotARepresentationError("inverse element's matrix is not the inverse");
  }

  // Well-definedness on cosets: matrices must stabilize the null directions.
  if (space->has_null()) {
    Eigen::MatrixXcd nullco = space->basis()
                                  .completeOrthogonalDecomposition()
                                  .solve(space->null_basis());
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> ncod(nullco);
    ncod.setThreshold(1e-10);
    for (int g = 0; g < n; ++g) {
      Eigen::MatrixXcd moved = matrices[static_cast<std::size_t>(g)] * nullco;
      double resid = max_abs(nullco * ncod.solve(moved) - moved);
      if (resid > 1e-9 * std::max(1.0, max_abs(moved)))
        throw NotARepresentationError("matrices do not preserve the null space");
    }
  }

  // Isometry in both directions; permutation-like matrices resolve in closed
  // form so regular representations validate instantly.
  SolverOptions iso_opts = opts;
  iso_opts.starts = std::max(8, opts.starts / 4);
  for (int g = 0; g < n; ++g) {
    NormEstimate fwd = opnorm(matrices[static_cast<std::size_t>(g)], space, space, iso_opts);
    if (fwd.lower > 1.0 + 1e-8)
      throw NotARepresentationError("matrix is not a contraction");
    NormEstimate bwd = opnorm(matrices[static_cast<std::size_t>(group->inv(g))],
                              space, space, iso_opts);
    if (bwd.lower > 1.0 + 1e-8)
      throw NotARepresentationError("inverse matrix is not a contraction");
  }

  return create_trusted(std::move(group), std::move(space), std::move(matrices));
}

Eigen::MatrixXcd Representation::lift_matrix(const GroupFunction& f) const {
  if (!f.group || !f.group->same_as(*group_))
    throw GroupMismatchError("function lives on a different group");
  const int k = dim();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(k, k);
  for (int x = 0; x < group_->order(); ++x)
    if (f.coeffs(x) != std::complex<double>(0.0))
      out += f.coeffs(x) * matrices_[static_cast<std::size_t>(x)];
  return out;
}

bool Representation::same_as(const Representation& other) const {
  if (this == &other) return true;
  if (!group_->same_as(*other.group_) || !space_->same_as(*other.space_))
    return false;
  for (std::size_t i = 0; i < matrices_.size(); ++i)
    if (matrices_[i] != other.matrices_[i]) return false;
  return true;
}

RepPtr left_regular(const GroupPtr& group, double p) {
  const int n = group->order();
  SpacePtr space = QSLpSpace::lp(n, p);
  std::vector<Eigen::MatrixXcd> mats;
  mats.reserve(static_cast<std::size_t>(n));
  for (int g = 0; g < n; ++g) {
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n, n);
    for (int x = 0; x < n; ++x) M(group->mul(g, x), x) = 1.0;
    mats.push_back(std::move(M));
  }
  return Representation::create(group, space, std::move(mats));
}

RepPtr trivial_rep(const GroupPtr& group, double p) {
  std::vector<Eigen::MatrixXcd> mats(
      static_cast<std::size_t>(group->order()),
      Eigen::MatrixXcd::Identity(1, 1));
  return Representation::create(group, QSLpSpace::lp(1, p), std::move(mats));
}

RepPtr permutation_rep(const GroupPtr& group,
                       const std::vector<std::vector<int>>& action, double p) {
  const int n = group->order();
  if (static_cast<int>(action.size()) != n)
    throw NotARepresentationError("action needs one row per group element");
  const int pts = static_cast<int>(action.front().size());
  for (const auto& row : action) {
    if (static_cast<int>(row.size()) != pts)
      throw NotARepresentationError("action rows have inconsistent lengths");
    for (int v : row)
      if (v < 0 || v >= pts)
        throw NotARepresentationError("action moves a point out of range");
  }
  std::vector<Eigen::MatrixXcd> mats;
  mats.reserve(static_cast<std::size_t>(n));
  for (int g = 0; g < n; ++g) {
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(pts, pts);
    for (int x = 0; x < pts; ++x)
      M(action[static_cast<std::size_t>(g)][static_cast<std::size_t>(x)], x) = 1.0;
    mats.push_back(std::move(M));
  }
  return Representation::create(group, QSLpSpace::lp(pts, p), std::move(mats));
}

RepPtr direct_sum_rep(const std::vector<RepPtr>& parts) {
  if (parts.empty()) throw ShapeMismatchError("direct sum of zero representations");
  const GroupPtr& group = parts.front()->group();
  std::vector<SpacePtr> spaces;
  int k = 0;
  for (const auto& part : parts) {
    if (!part->group()->same_as(*group))
      throw GroupMismatchError("direct sum requires one common group");
    spaces.push_back(part->space());
    k += part->dim();
  }
  SpacePtr space = direct_sum_space(spaces);

  std::vector<Eigen::MatrixXcd> mats;
  mats.reserve(static_cast<std::size_t>(group->order()));
  for (int g = 0; g < group->order(); ++g) {
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(k, k);
    int off = 0;
    for (const auto& part : parts) {
      M.block(off, off, part->dim(), part->dim()) = part->matrix(g);
      off += part->dim();
    }
    mats.push_back(std::move(M));
  }
  return Representation::create_trusted(group, space, std::move(mats));
}

LiftedOperator lift(const RepPtr& rep, const GroupFunction& f) {
  return {rep, f, rep->lift_matrix(f)};
}

GroupFunctionMatrix GroupFunctionMatrix::from_functions(
    const std::vector<std::vector<GroupFunction>>& fs) {
  GroupFunctionMatrix F;
  if (fs.empty() || fs.front().empty())
    throw ShapeMismatchError("empty function matrix");
  F.rows = static_cast<int>(fs.size());
  F.cols = static_cast<int>(fs.front().size());
  F.group = fs.front().front().group;
  for (const auto& row : fs) {
    if (static_cast<int>(row.size()) != F.cols)
      throw ShapeMismatchError("ragged function matrix");
    for (const auto& f : row) {
      if (!f.group->same_as(*F.group))
        throw GroupMismatchError("function matrix mixes groups");
      F.entries.push_back(f.coeffs);
    }
  }
  return F;
}

GroupFunctionMatrix GroupFunctionMatrix::diagonal(const GroupFunction& f, int n) {
  GroupFunctionMatrix F;
  F.group = f.group;
  F.rows = F.cols = n;
  Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(f.group->order());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) F.entries.push_back(i == j ? f.coeffs : zero);
  return F;
}

GroupFunctionMatrix GroupFunctionMatrix::random(const GroupPtr& group, int rows,
                                                int cols, CounterRng& rng) {
  GroupFunctionMatrix F;
  F.group = group;
  F.rows = rows;
  F.cols = cols;
  for (int i = 0; i < rows * cols; ++i)
    F.entries.push_back(random_function(group, rng).coeffs);
  return F;
}

Eigen::MatrixXcd amplified_lift(const RepPtr& rep, const GroupFunctionMatrix& F) {
  if (!F.group || !F.group->same_as(*rep->group()))
    throw GroupMismatchError("function matrix lives on a different group");
  const int k = rep->dim();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(F.rows * k, F.cols * k);
  for (int i = 0; i < F.rows; ++i)
    for (int j = 0; j < F.cols; ++j) {
      GroupFunction f{rep->group(), F.at(i, j)};
      out.block(i * k, j * k, k, k) = rep->lift_matrix(f);
    }
  return out;
}

CyclicSubrep cyclic_subrep(const RepPtr& rep, const Eigen::VectorXcd& xi) {
  const int k = rep->dim();
  if (xi.size() != k) throw ShapeMismatchError("generator has wrong dimension");
  if (xi.norm() <= 1e-14)
    throw ZeroVectorError("cyclic generator is numerically zero");
  if (rep->space()->has_null())
    throw NotARepresentationError(
        "cyclic extraction requires a null-free base space");

  const int n = rep->group()->order();
  Eigen::MatrixXcd orbit(k, n);
  for (int g = 0; g < n; ++g) orbit.col(g) = rep->matrix(g) * xi;

  // Orthonormal basis of the orbit span in coordinate space.
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(orbit, Eigen::ComputeThinU);
  double smax = svd.singularValues()(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-10 * smax) ++rank;
  Eigen::MatrixXcd Q = svd.matrixU().leftCols(rank);

  std::vector<Eigen::MatrixXcd> mats;
  mats.reserve(static_cast<std::size_t>(n));
  double scale = std::max(1.0, max_abs(orbit));
  for (int g = 0; g < n; ++g) {
    Eigen::MatrixXcd moved = rep->matrix(g) * Q;
    Eigen::MatrixXcd restricted = Q.adjoint() * moved;
    // Span test: the orbit span must be invariant.
    if (max_abs(moved - Q * restricted) > 1e-9 * scale)
      throw NotARepresentationError("orbit span is not invariant");
    mats.push_back(std::move(restricted));
  }

  SpacePtr sub = QSLpSpace::subspace(rep->space()->basis() * Q, rep->space()->p());
  CyclicSubrep result;
  result.rep = Representation::create_trusted(rep->group(), sub, std::move(mats));
  result.inclusion = Q;
  result.xi_coords = Q.adjoint() * xi;
  return result;
}

EquivalenceReport equivalence_check(const RepPtr& rep1, const RepPtr& rep2,
                                    const Eigen::MatrixXcd& T,
                                    const SolverOptions& opts) {
  EquivalenceReport rep;
  if (!rep1->group()->same_as(*rep2->group()))
    throw GroupMismatchError("equivalence requires one common group");
  if (T.rows() != rep2->dim() || T.cols() != rep1->dim()) return rep;
  if (T.rows() != T.cols()) return rep;
  rep.shape_ok = true;

  Eigen::FullPivLU<Eigen::MatrixXcd> lu(T);
  lu.setThreshold(1e-12);
  rep.invertible = lu.isInvertible();
  if (!rep.invertible) return rep;
  Eigen::MatrixXcd Tinv = lu.inverse();

  const int n = rep1->group()->order();
  double scale = std::max(1.0, max_abs(T));
  for (int g = 0; g < n; ++g)
    rep.intertwine_residual =
        std::max(rep.intertwine_residual,
                 max_abs(T * rep1->matrix(g) - rep2->matrix(g) * T) / scale);

  // Amplifications act blockwise, checked on the block-structured lifts.
  for (int m = 2; m <= 3; ++m) {
    Eigen::MatrixXcd Tn = Eigen::MatrixXcd::Zero(m * T.rows(), m * T.cols());
    for (int b = 0; b < m; ++b)
      Tn.block(b * T.rows(), b * T.cols(), T.rows(), T.cols()) = T;
    CounterRng rng(0x717, rep1->hash() ^ rep2->hash(), static_cast<std::uint64_t>(m));
    GroupFunctionMatrix F =
        GroupFunctionMatrix::random(rep1->group(), m, m, rng);
    Eigen::MatrixXcd L1 = amplified_lift(rep1, F);
    Eigen::MatrixXcd L2 = amplified_lift(rep2, F);
    double ref = std::max({1.0, max_abs(L1), max_abs(L2)}) * scale;
    rep.amplified_residual = std::max(
        rep.amplified_residual, max_abs(Tn * L1 - L2 * Tn) / ref);
  }

  rep.forward_norm = opnorm(T, rep1->space(), rep2->space(), opts);
  rep.backward_norm = opnorm(Tinv, rep2->space(), rep1->space(), opts);
  rep.isometric = std::abs(rep.forward_norm.lower - 1.0) <= 1e-8 &&
                  std::abs(rep.backward_norm.lower - 1.0) <= 1e-8;
  rep.equivalent =
      rep.invertible && rep.isometric && rep.intertwine_residual <= 1e-9 &&
      rep.amplified_residual <= 1e-9;
  return rep;
}

DecomposeReport cyclic_matrix_decompose(const RepPtr& rep, int n,
                                        const Eigen::VectorXcd& x) {
  const int k = rep->dim();
  if (x.size() != static_cast<Eigen::Index>(n) * k)
    throw ShapeMismatchError("vector does not match the amplified space");
  const int ord = rep->group()->order();

  // Span of the component orbits.
  Eigen::MatrixXcd comp(k, n * ord);
  for (int t = 0; t < n; ++t)
    for (int g = 0; g < ord; ++g)
      comp.col(t * ord + g) = rep->matrix(g) * x.segment(t * k, k);
  Eigen::JacobiSVD<Eigen::MatrixXcd> csvd(comp, Eigen::ComputeThinU);
  double smax = csvd.singularValues().size() ? csvd.singularValues()(0) : 0.0;
  int wdim = 0;
  for (Eigen::Index i = 0; i < csvd.singularValues().size(); ++i)
    if (csvd.singularValues()(i) > 1e-10 * std::max(smax, 1e-30)) ++wdim;
  Eigen::MatrixXcd W = csvd.matrixU().leftCols(wdim);

  // Span generated from x by the matrix lifts: slot s receives the orbit of
  // every component, independently across slots.
  Eigen::MatrixXcd gens(n * k, static_cast<Eigen::Index>(n) * n * ord);
  gens.setZero();
  Eigen::Index col = 0;
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t)
      for (int g = 0; g < ord; ++g) {
        gens.block(s * k, col, k, 1) = rep->matrix(g) * x.segment(t * k, k);
        ++col;
      }
  Eigen::JacobiSVD<Eigen::MatrixXcd> gsvd(gens, Eigen::ComputeThinU);
  double gmax = gsvd.singularValues().size() ? gsvd.singularValues()(0) : 0.0;
  int kdim = 0;
  for (Eigen::Index i = 0; i < gsvd.singularValues().size(); ++i)
    if (gsvd.singularValues()(i) > 1e-10 * std::max(gmax, 1e-30)) ++kdim;
  Eigen::MatrixXcd K = gsvd.matrixU().leftCols(kdim);

  // Containment of K in the blockwise copy of W, and the converse by rank.
  DecomposeReport out;
  out.joint_dim = kdim;
  out.component_dim = wdim;
  double resid = 0.0;
  for (Eigen::Index c = 0; c < K.cols(); ++c) {
    for (int s = 0; s < n; ++s) {
      Eigen::VectorXcd blockv = K.col(c).segment(s * k, k);
      Eigen::VectorXcd proj = W * (W.adjoint() * blockv);
      resid = std::max(resid, (blockv - proj).norm());
    }
  }
  out.residual = resid;
  out.equal = (kdim == n * wdim) && resid <= 1e-9;
  return out;
}

}  // namespace pfa
