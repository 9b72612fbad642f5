#include <benchmark/benchmark.h>

#include "ncsafe/qp.hpp"
#include "ncsafe/rng.hpp"

using namespace ncsafe;

static QPProblem random_qp(int n, int mc, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Mat R(n, n);
  for (int i = 0; i < n * n; ++i) R.data()[i] = rng.next_normal();
  QPProblem p;
  p.H = R.transpose() * R + Mat::Identity(n, n);
  p.c = Vec(n);
  for (int i = 0; i < n; ++i) p.c[i] = rng.next_normal();
  p.A = Mat(mc, n);
  p.b = Vec(mc);
  for (int i = 0; i < mc; ++i) {
    for (int j = 0; j < n; ++j) p.A(i, j) = rng.next_normal();
    p.b[i] = -std::abs(rng.next_normal());
  }
  return p;
}

static void BM_ActiveSetQP(benchmark::State& state) {
  const QPProblem p = random_qp(static_cast<int>(state.range(0)),
                                static_cast<int>(state.range(1)), 7);
  for (auto _ : state) {
    auto rep = solve_qp(p);
    benchmark::DoNotOptimize(rep.solution);
  }
}
BENCHMARK(BM_ActiveSetQP)->Args({3, 8})->Args({15, 40})->Args({20, 130});
