// Microbenchmarks for the paths that dominate experiment wall time: the
// operator-norm solvers, lift norms, family construction, and the quotient
// minimizer underneath every non-plain norm.

#include <benchmark/benchmark.h>

#include "pfa/bp_algebra.hpp"

using namespace pfa;

namespace {

Eigen::MatrixXcd random_matrix(int rows, int cols, std::uint64_t key) {
  CounterRng rng(11, key, 0xbe);
  Eigen::MatrixXcd A(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) A(i, j) = rng.next_cnormal();
  return A;
}

SolverOptions desk_budget() {
  SolverOptions opts;
  opts.starts = 8;
  opts.max_iterations = 200;
  return opts;
}

void bench_opnorm_boyd(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Eigen::MatrixXcd A = random_matrix(n, n, 1);
  SolverOptions opts = desk_budget();
  for (auto _ : state)
    benchmark::DoNotOptimize(opnorm_boyd(A, 2.5, 2.5, opts).lower);
}
BENCHMARK(bench_opnorm_boyd)->Arg(4)->Arg(8)->Arg(16);

void bench_opnorm_svd(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Eigen::MatrixXcd A = random_matrix(n, n, 2);
  auto E = QSLpSpace::lp(n, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(opnorm(A, E, E).lower);
}
BENCHMARK(bench_opnorm_svd)->Arg(4)->Arg(16);

void bench_opnorm_bruteforce_2x2(benchmark::State& state) {
  Eigen::MatrixXcd A = random_matrix(2, 2, 3);
  auto E = QSLpSpace::lp(2, 1.5);
  const int resolution = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(opnorm_bruteforce(A, E, E, resolution).lower);
}
BENCHMARK(bench_opnorm_bruteforce_2x2)->Arg(20)->Arg(60);

void bench_quotient_minimizer(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  CounterRng rng(12, static_cast<std::uint64_t>(m), 0x90);
  Eigen::VectorXcd a(m);
  Eigen::MatrixXcd M(m, m / 2);
  for (int i = 0; i < m; ++i) a(i) = rng.next_cnormal();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m / 2; ++j) M(i, j) = rng.next_cnormal();
  for (auto _ : state)
    benchmark::DoNotOptimize(detail::minimize_lp_affine(a, M, 2.5).value);
}
BENCHMARK(bench_quotient_minimizer)->Arg(8)->Arg(24);

void bench_convolution(benchmark::State& state) {
  auto g = dihedral_group(6);
  CounterRng rng(13, g->hash(), 0xc0);
  GroupFunction f = random_function(g, rng);
  GroupFunction h = random_function(g, rng);
  for (auto _ : state) benchmark::DoNotOptimize(convolve(f, h).coeffs.sum());
}
BENCHMARK(bench_convolution);

void bench_pf_norm_regular(benchmark::State& state) {
  auto g = dihedral_group(3);
  auto rep = left_regular(g, 2.5);
  CounterRng rng(14, g->hash(), 0x9f);
  GroupFunction f = random_function(g, rng);
  SolverOptions opts = desk_budget();
  for (auto _ : state) benchmark::DoNotOptimize(pf_norm(rep, f, opts).lower);
}
BENCHMARK(bench_pf_norm_regular);

void bench_family_build(benchmark::State& state) {
  auto g = cyclic_group(4);
  auto rep = left_regular(g, 2.0);
  std::vector<GroupFunction> probes;
  for (int x = 0; x < g->order(); ++x) probes.push_back(delta(g, x));
  probes.push_back(constant(g, 1.0));
  SolverOptions opts = desk_budget();
  for (auto _ : state) {
    UniversalFamily fam = build_universal_family(rep, probes, 4, opts);
    benchmark::DoNotOptimize(fam.compute_reps.size());
  }
}
BENCHMARK(bench_family_build);

void bench_bp_lower(benchmark::State& state) {
  auto g = cyclic_group(4);
  auto rep = left_regular(g, 2.0);
  std::vector<GroupFunction> probes;
  for (int x = 0; x < g->order(); ++x) probes.push_back(delta(g, x));
  probes.push_back(constant(g, 1.0));
  SolverOptions opts = desk_budget();
  UniversalFamily fam = build_universal_family(rep, probes, 4, opts);
  CounterRng rng(15, g->hash(), 0xb9);
  Eigen::VectorXcd values(g->order());
  for (int i = 0; i < g->order(); ++i) values(i) = rng.next_cnormal();
  BpElement u = bp_from_values(g, values);
  for (auto _ : state)
    benchmark::DoNotOptimize(bp_norm_lower(fam, u, opts).value);
}
BENCHMARK(bench_bp_lower);

}  // namespace

BENCHMARK_MAIN();
