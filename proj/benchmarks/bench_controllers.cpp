#include <benchmark/benchmark.h>

#include "ncsafe/experiment.hpp"
#include "ncsafe/mpc.hpp"
#include "ncsafe/safety.hpp"

using namespace ncsafe;

namespace {

ExperimentConfig bench_config() {
  ExperimentConfig cfg = default_experiment();
  return cfg;
}

}  // namespace

static void BM_LocalFilter(benchmark::State& state) {
  const ExperimentConfig cfg = bench_config();
  LoopSpec spec = make_loop_spec(cfg, Architecture::LocalCBF, nullptr);
  const Vec x0 = cfg.scenario.initial_state();
  Vec u_ref(3);
  u_ref << 2.0, -1.5, 0.5;
  for (auto _ : state) {
    auto res = filter(spec.plain_filter, x0, u_ref);
    benchmark::DoNotOptimize(res.u_applied);
  }
}
BENCHMARK(BM_LocalFilter);

static void BM_MPCCBFSolve_Warm(benchmark::State& state) {
  const ExperimentConfig cfg = bench_config();
  LoopSpec spec = make_loop_spec(cfg, Architecture::RemoteMPCCBF, nullptr);
  MPCController controller(spec.mpc);
  const Vec x0 = cfg.scenario.initial_state();
  controller.solve_mpc_cbf(x0);  // fill the warm start
  for (auto _ : state) {
    auto sol = controller.solve_mpc_cbf(x0);
    benchmark::DoNotOptimize(sol.inputs);
  }
}
BENCHMARK(BM_MPCCBFSolve_Warm);

static void BM_MPCCBFSolve_Cold(benchmark::State& state) {
  const ExperimentConfig cfg = bench_config();
  LoopSpec spec = make_loop_spec(cfg, Architecture::RemoteMPCCBF, nullptr);
  const Vec x0 = cfg.scenario.initial_state();
  for (auto _ : state) {
    MPCController controller(spec.mpc);
    auto sol = controller.solve_mpc_cbf(x0);
    benchmark::DoNotOptimize(sol.inputs);
  }
}
BENCHMARK(BM_MPCCBFSolve_Cold);
