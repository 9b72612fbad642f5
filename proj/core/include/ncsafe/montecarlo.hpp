#pragma once

#include <functional>
#include <map>
#include <vector>

#include "ncsafe/experiment.hpp"

namespace ncsafe {

struct ArchitectureStats {
  double safe_rate = 0.0;
  double reach_rate = 0.0;
  double success_rate = 0.0;       // safe AND reached
  double avg_reach_time_s = 0.0;   // over safe-and-reached runs
  double peak_jerk_mean = 0.0;     // mean of per-run peaks (headline)
  double peak_jerk_max = 0.0;      // batch max
  int n_runs = 0;
};

// Per-step clearance statistics across runs (distance of the closest arm
// point to the obstacle surface).
struct ClearanceEnvelope {
  std::vector<double> mean, min, max;
};

struct BatchReport {
  std::vector<std::pair<Architecture, ArchitectureStats>> stats;
  // envelopes[arch_index][obstacle_index]
  std::vector<std::vector<ClearanceEnvelope>> envelopes;
  int n_runs = 0;
  std::uint64_t seed = 0;
};

struct CalibrationOptions {
  int estimator_samples = 4000;
  std::uint64_t estimator_seed = 7;
  double inflation = 1.0;  // the disturbance-free probes are exact replays
  std::vector<double> velocity_scales{1.0, 0.5, 0.2, 0.1, 0.05, 0.02};
  int rho_u_runs = 3;
};

// Scenario-constant calibration replicating the paper's procedure:
// disturbance-free runs fix the margins, sampled Lipschitz estimates fix
// the constants, the closed-form bounds give the pair (w_bar_l, w_bar_r)
// in torque units, and a short disturbed batch sizes the input tightening.
Calibration calibrate_tolerances(const ExperimentConfig& cfg,
                                 const CalibrationOptions& opts = {});

// Paired Monte Carlo batch: run r of every architecture sees the identical
// disturbance realization. on_run (optional) is invoked from worker
// threads, once per finished run, with distinct (arch, run) pairs.
BatchReport run_batch(
    const ExperimentConfig& cfg, const std::vector<Architecture>& architectures,
    const DisturbanceSpec& spec, int n_runs, const Calibration* calib,
    const std::function<void(Architecture, int, const RunRecord&)>& on_run = nullptr);

// Worker count: NCSAFE_WORKERS environment variable, else hardware
// concurrency.
int worker_count();

}  // namespace ncsafe
