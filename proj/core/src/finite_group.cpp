#include "pfa/finite_group.hpp"

#include <utility>

namespace pfa {

std::shared_ptr<const FiniteGroup> FiniteGroup::from_table(
    std::vector<std::vector<int>> table) {
  const int n = static_cast<int>(table.size());
  if (n == 0) throw NotAGroupError("empty multiplication table", 0, 0, 0);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(table[static_cast<std::size_t>(i)].size()) != n)
      throw NotAGroupError("multiplication table is not square", i, 0, 0);
    for (int j = 0; j < n; ++j) {
      int v = table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (v < 0 || v >= n)
        throw NotAGroupError("table entry out of range", i, j, v);
    }
  }

  auto g = std::shared_ptr<FiniteGroup>(new FiniteGroup());
  g->order_ = n;
  g->table_.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      g->table_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                static_cast<std::size_t>(j)] =
          table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];

  // Latin square: every row and column is a permutation.
  std::vector<char> seen(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::fill(seen.begin(), seen.end(), 0);
    for (int j = 0; j < n; ++j) {
      int v = g->mul(i, j);
      if (seen[static_cast<std::size_t>(v)])
        throw NotAGroupError("row is not a permutation", i, j, v);
      seen[static_cast<std::size_t>(v)] = 1;
    }
  }
  for (int j = 0; j < n; ++j) {
    std::fill(seen.begin(), seen.end(), 0);
    for (int i = 0; i < n; ++i) {
      int v = g->mul(i, j);
      if (seen[static_cast<std::size_t>(v)])
        throw NotAGroupError("column is not a permutation", i, j, v);
      seen[static_cast<std::size_t>(v)] = 1;
    }
  }

  // Two-sided identity.
  int identity = -1;
  for (int e = 0; e < n; ++e) {
    bool ok = true;
    for (int x = 0; x < n && ok; ++x)
      ok = g->mul(e, x) == x && g->mul(x, e) == x;
    if (ok) {
      identity = e;
      break;
    }
  }
  if (identity < 0) throw NotAGroupError("no two-sided identity", 0, 0, 0);
  g->identity_ = identity;

  // Inverses.
  g->inverse_.assign(static_cast<std::size_t>(n), -1);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (g->mul(a, b) == identity && g->mul(b, a) == identity) {
        g->inverse_[static_cast<std::size_t>(a)] = b;
        break;
      }
    }
    if (g->inverse_[static_cast<std::size_t>(a)] < 0)
      throw NotAGroupError("element has no two-sided inverse", a, 0, 0);
  }

  // Associativity: exhaustive up to order 64, sampled triples above that.
  if (n <= 64) {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          if (g->mul(g->mul(a, b), c) != g->mul(a, g->mul(b, c)))
            throw NotAGroupError("associativity fails", a, b, c);
  } else {
    CounterRng rng(0x5eedu, 0xa550c1a7e5u);
    for (int t = 0; t < 65536; ++t) {
      int a = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
      int b = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
      int c = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
      if (g->mul(g->mul(a, b), c) != g->mul(a, g->mul(b, c)))
        throw NotAGroupError("associativity fails", a, b, c);
    }
  }

  g->abelian_ = true;
  for (int a = 0; a < n && g->abelian_; ++a)
    for (int b = 0; b < a && g->abelian_; ++b)
      if (g->mul(a, b) != g->mul(b, a)) g->abelian_ = false;

  Hasher h;
  h.i32(n).span(g->table_);
  g->hash_ = h.digest();
  return g;
}

GroupPtr cyclic_group(int n) {
  if (n <= 0) throw NotAGroupError("cyclic group order must be positive", n, 0, 0);
  std::vector<std::vector<int>> table(static_cast<std::size_t>(n),
                                      std::vector<int>(static_cast<std::size_t>(n)));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      table[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = (a + b) % n;
  return FiniteGroup::from_table(std::move(table));
}

GroupPtr dihedral_group(int n) {
  if (n <= 0) throw NotAGroupError("dihedral parameter must be positive", n, 0, 0);
  const int m = 2 * n;
  // Element k < n is the rotation r^k, element n + k is s r^k, with the
  // relations r^n = s^2 = e and s r = r^{-1} s.
  auto rot = [n](int x) { return x % n; };
  std::vector<std::vector<int>> table(static_cast<std::size_t>(m),
                                      std::vector<int>(static_cast<std::size_t>(m)));
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      bool fa = a >= n, fb = b >= n;
      int ka = rot(a), kb = rot(b);
      int out;
      if (!fa && !fb) {
        out = (ka + kb) % n;                    // r^ka r^kb
      } else if (!fa && fb) {
        out = n + (kb - ka + n) % n;            // r^ka s r^kb = s r^{kb-ka}
      } else if (fa && !fb) {
        out = n + (ka + kb) % n;                // s r^ka r^kb
      } else {
        out = (kb - ka + n) % n;                // s r^ka s r^kb = r^{kb-ka}
      }
      table[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = out;
    }
  }
  return FiniteGroup::from_table(std::move(table));
}

GroupFunction::GroupFunction(GroupPtr g, Eigen::VectorXcd c)
    : group(std::move(g)), coeffs(std::move(c)) {
  if (!group) throw GroupMismatchError("group function without a group");
  if (coeffs.size() != group->order())
    throw ShapeMismatchError("coefficient count does not match group order");
}

GroupFunction delta(const GroupPtr& group, int x) {
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(group->order());
  c(x) = 1.0;
  return {group, std::move(c)};
}

GroupFunction constant(const GroupPtr& group, std::complex<double> value) {
  Eigen::VectorXcd c = Eigen::VectorXcd::Constant(group->order(), value);
  return {group, std::move(c)};
}

GroupFunction random_function(const GroupPtr& group, CounterRng& rng) {
  Eigen::VectorXcd c(group->order());
  for (int i = 0; i < group->order(); ++i) c(i) = rng.next_cnormal();
  return {group, std::move(c)};
}

void require_same_group(const GroupFunction& f, const GroupFunction& g) {
  if (!f.group || !g.group)
    throw GroupMismatchError("group function without a group");
  if (f.group.get() == g.group.get()) return;
  if (!f.group->same_as(*g.group))
    throw GroupMismatchError("functions live on different groups");
}

GroupFunction convolve(const GroupFunction& f, const GroupFunction& g) {
  require_same_group(f, g);
  const FiniteGroup& G = *f.group;
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(G.order());
  for (int x = 0; x < G.order(); ++x) {
    std::complex<double> acc = 0.0;
    for (int y = 0; y < G.order(); ++y)
      acc += f.coeffs(y) * g.coeffs(G.mul(G.inv(y), x));
    out(x) = acc;
  }
  return {f.group, std::move(out)};
}

std::complex<double> haar_integral(const GroupFunction& f) {
  return f.coeffs.sum();
}

double l1_norm(const GroupFunction& f) {
  return f.coeffs.cwiseAbs().sum();
}

}  // namespace pfa
