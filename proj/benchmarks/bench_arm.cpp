#include <benchmark/benchmark.h>

#include "ncsafe/robot.hpp"

using namespace ncsafe;

static void BM_ArmStep(benchmark::State& state) {
  const robot::ArmModel arm;
  Vec x(6);
  x << 1.2, -0.4, 0.3, 0.5, -0.2, 0.8;
  Vec u(3);
  u << 1.0, -0.5, 0.2;
  const Vec w = Vec::Zero(6);
  for (auto _ : state) {
    x = robot::arm_step(arm, x, u, w);
    x.tail<3>() *= 0.999;  // keep the state bounded
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_ArmStep);

static void BM_BarrierBatch(benchmark::State& state) {
  robot::Scenario sc;
  sc.obstacles = {{robot::Vector2d(0.45, 0.42), 0.10}, {robot::Vector2d(0.20, 0.38), 0.10}};
  sc.waypoints = {robot::Vector2d(0.6, 0.1)};
  auto set = robot::build_barriers(sc, 0.2);
  const Vec x0 = sc.initial_state();
  for (auto _ : state) {
    benchmark::DoNotOptimize(set->values(x0));
  }
}
BENCHMARK(BM_BarrierBatch);
