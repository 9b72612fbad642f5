#include "ncsafe/montecarlo.hpp"

#include <Eigen/SVD>
#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "ncsafe/bounds.hpp"

namespace ncsafe {

int worker_count() {
  if (const char* env = std::getenv("NCSAFE_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace {

// Scaled state norm ||(dq, alpha*dqd)||; the estimates are carried out on
// the transformed system so every alpha yields a valid bound chain, and the
// calibration keeps the tightest one.
Vec scale_state(const Vec& x, double alpha) {
  Vec z = x;
  z.tail(3) *= alpha;
  return z;
}

Vec unscale_state(const Vec& z, double alpha) {
  Vec x = z;
  x.tail(3) /= alpha;
  return x;
}

Box trajectory_region(const std::vector<const RunRecord*>& runs, double pad_frac) {
  const int n = static_cast<int>(runs.front()->states.front().size());
  Vec lo = Vec::Constant(n, std::numeric_limits<double>::infinity());
  Vec hi = Vec::Constant(n, -std::numeric_limits<double>::infinity());
  for (const RunRecord* r : runs) {
    for (const Vec& x : r->states) {
      lo = lo.cwiseMin(x);
      hi = hi.cwiseMax(x);
    }
  }
  Vec span = (hi - lo).cwiseMax(1e-3);
  lo -= pad_frac * span;
  hi += pad_frac * span;
  return Box{lo, hi};
}

}  // namespace

Calibration calibrate_tolerances(const ExperimentConfig& cfg,
                                 const CalibrationOptions& opts) {
  const int steps = cfg.scenario.sim_horizon_steps;
  const std::vector<Vec> zero_dist(steps, Vec::Zero(3));

  // Disturbance-free probes for the two bound-defining architectures.
  LoopSpec local_spec = make_loop_spec(cfg, Architecture::LocalCBF, nullptr);
  RunRecord local_run = run(Architecture::LocalCBF, local_spec, zero_dist);
  LoopSpec remote_spec = make_loop_spec(cfg, Architecture::RemoteMPCCBF, nullptr);
  RunRecord remote_run = run(Architecture::RemoteMPCCBF, remote_spec, zero_dist);

  if (local_run.aborted || remote_run.aborted)
    throw std::runtime_error("calibrate_tolerances: disturbance-free run aborted: " +
                             (local_run.aborted ? local_run.abort_reason
                                                : remote_run.abort_reason));
  if (local_run.safety_violated || remote_run.safety_violated)
    throw std::runtime_error(
        "calibrate_tolerances: disturbance-free run left the safe set; scenario "
        "miscalibrated");

  Calibration cal;
  cal.eta_l = local_run.min_h;
  cal.eta_r = remote_run.min_h;
  cal.operating_region = trajectory_region({&local_run, &remote_run}, 0.1);

  SystemModel model = robot::make_system_model(cfg.scenario.arm);
  auto barriers = robot::build_barriers(cfg.scenario, cfg.mpc.gamma);
  cal.lipschitz_h = barriers->max_lipschitz();

  // Estimate (L_f, L_g) over the visited region for each candidate norm
  // scale and keep the scale with the smallest propagation gain L_d.
  double best_ld = std::numeric_limits<double>::infinity();
  for (double alpha : opts.velocity_scales) {
    Box region_z = cal.operating_region;
    region_z.lo.tail(3) *= alpha;
    region_z.hi.tail(3) *= alpha;
    auto fz = [&model, alpha](const Vec& z) -> Vec {
      return scale_state(model.f(unscale_state(z, alpha)), alpha);
    };
    auto gz = [&model, alpha](const Vec& z) -> Mat {
      Mat g = model.g(unscale_state(z, alpha));
      g.bottomRows(3) *= alpha;
      return g;
    };
    const double lf = estimate_lipschitz(fz, region_z, opts.estimator_samples,
                                         opts.estimator_seed, opts.inflation);
    const double lg = estimate_lipschitz_matrix(gz, region_z, opts.estimator_samples,
                                                opts.estimator_seed + 1, opts.inflation);
    const double ld = lf + lg * cfg.scenario.input_limit;
    if (ld < best_ld) {
      best_ld = ld;
      cal.lipschitz_f = lf;
      cal.lipschitz_g = lg;
      cal.velocity_scale = alpha;
    }
  }

  // Input-channel gain max sigma(S g(x)) over the region (scaled norm).
  {
    SplitMix64 rng(opts.estimator_seed + 2);
    const Box& reg = cal.operating_region;
    double gain = 0.0;
    for (int s = 0; s < opts.estimator_samples; ++s) {
      Vec x(reg.lo.size());
      for (int i = 0; i < x.size(); ++i) x[i] = rng.next_uniform(reg.lo[i], reg.hi[i]);
      Mat g = model.g(x);
      g.bottomRows(3) *= cal.velocity_scale;
      gain = std::max(gain, g.jacobiSvd().singularValues()[0]);
    }
    cal.input_gain = 1.05 * gain;
  }

  ToleranceInputs ti;
  ti.gamma = cfg.mpc.gamma;
  ti.lipschitz_h = cal.lipschitz_h;
  ti.lipschitz_f = cal.lipschitz_f;
  ti.lipschitz_g = cal.lipschitz_g;
  ti.input_norm_max = cfg.scenario.input_limit;
  ti.tau = cfg.tau;
  ti.horizon = cfg.mpc.horizon;

  ti.h_value = cal.eta_l;
  cal.w_bar_l = local_tolerance(ti) / cal.input_gain;
  ti.h_value = cal.eta_r;
  cal.w_bar_r = remote_tolerance_horizon(ti) / cal.input_gain;

  if (!(cal.w_bar_r <= cal.w_bar_l))
    throw std::runtime_error("calibrate_tolerances: w_bar_r > w_bar_l");

  // Size the input tightening from the local corrections observed at the
  // w_bar_l disturbance level.
  double max_correction = 0.0;
  ExperimentConfig probe_cfg = cfg;
  probe_cfg.disturbance =
      DisturbanceSpec::custom(cal.w_bar_l / 2.0, cal.w_bar_l, cfg.disturbance.seed + 101);
  for (int r = 0; r < opts.rho_u_runs; ++r) {
    RunRecord rec = run_single(probe_cfg, Architecture::RobustLocalCBF, &cal, r);
    for (const auto& st : rec.steps) {
      if (st.warmup) continue;
      max_correction = std::max(max_correction, (st.u_applied - st.u_remote).norm());
    }
  }
  cal.rho_u = 1.5 * max_correction;
  return cal;
}

namespace {

struct RunSummary {
  bool safe = false;
  bool reached = false;
  bool aborted = false;
  double reach_time_s = 0.0;
  double peak_jerk = 0.0;
  int steps = 0;
  std::vector<std::vector<double>> clearances;  // per obstacle, per step
};

RunSummary summarize(const ExperimentConfig& cfg, const RunRecord& rec) {
  RunSummary s;
  s.aborted = rec.aborted;
  // Aborted runs count as unsafe and unreached.
  s.safe = !rec.aborted && !rec.safety_violated;
  s.reached = !rec.aborted && rec.reached_all;
  if (s.reached && !rec.waypoint_steps.empty())
    s.reach_time_s = rec.waypoint_steps.back() * cfg.scenario.arm.ts;
  s.peak_jerk = rec.peak_jerk;
  s.steps = static_cast<int>(rec.steps.size());
  const int n_obs = static_cast<int>(cfg.scenario.obstacles.size());
  s.clearances.resize(n_obs);
  for (int o = 0; o < n_obs; ++o) {
    s.clearances[o].reserve(rec.states.size());
    for (const Vec& x : rec.states)
      s.clearances[o].push_back(robot::obstacle_clearance(cfg.scenario, x, o));
  }
  return s;
}

}  // namespace

BatchReport run_batch(
    const ExperimentConfig& cfg, const std::vector<Architecture>& architectures,
    const DisturbanceSpec& spec, int n_runs, const Calibration* calib,
    const std::function<void(Architecture, int, const RunRecord&)>& on_run) {
  if (n_runs < 1) throw std::invalid_argument("run_batch: n_runs must be >= 1");

  // Paired fairness: one disturbance realization per run index, shared by
  // every architecture.
  std::vector<std::vector<Vec>> disturbances(n_runs);
  for (int r = 0; r < n_runs; ++r) {
    DisturbanceStream stream(spec, 3, static_cast<std::uint64_t>(r));
    disturbances[r].resize(cfg.scenario.sim_horizon_steps);
    for (auto& w : disturbances[r]) w = stream.next();
  }

  struct Task {
    int arch_idx;
    int run_idx;
  };
  std::vector<Task> tasks;
  for (int a = 0; a < static_cast<int>(architectures.size()); ++a)
    for (int r = 0; r < n_runs; ++r) tasks.push_back({a, r});

  std::vector<std::vector<RunSummary>> summaries(architectures.size());
  for (auto& v : summaries) v.resize(n_runs);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      const Task task = tasks[t];
      const Architecture arch = architectures[task.arch_idx];
      ExperimentConfig run_cfg = cfg;
      run_cfg.disturbance = spec;
      LoopSpec ls = make_loop_spec(run_cfg, arch, calib);
      RunRecord rec = run(arch, ls, disturbances[task.run_idx]);
      summaries[task.arch_idx][task.run_idx] = summarize(run_cfg, rec);
      if (on_run) on_run(arch, task.run_idx, rec);
    }
  };

  const int n_workers =
      std::min<int>(worker_count(), static_cast<int>(tasks.size()));
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  BatchReport report;
  report.n_runs = n_runs;
  report.seed = spec.seed;
  const int n_obs = static_cast<int>(cfg.scenario.obstacles.size());
  for (std::size_t a = 0; a < architectures.size(); ++a) {
    ArchitectureStats st;
    st.n_runs = n_runs;
    int n_safe = 0, n_reached = 0, n_success = 0;
    double reach_sum = 0.0;
    double jerk_sum = 0.0;
    for (const RunSummary& s : summaries[a]) {
      n_safe += s.safe ? 1 : 0;
      n_reached += s.reached ? 1 : 0;
      if (s.safe && s.reached) {
        ++n_success;
        reach_sum += s.reach_time_s;
      }
      jerk_sum += s.peak_jerk;
      st.peak_jerk_max = std::max(st.peak_jerk_max, s.peak_jerk);
    }
    st.safe_rate = static_cast<double>(n_safe) / n_runs;
    st.reach_rate = static_cast<double>(n_reached) / n_runs;
    st.success_rate = static_cast<double>(n_success) / n_runs;
    st.avg_reach_time_s = n_success > 0 ? reach_sum / n_success : 0.0;
    st.peak_jerk_mean = jerk_sum / n_runs;
    report.stats.emplace_back(architectures[a], st);

    std::vector<ClearanceEnvelope> envs(n_obs);
    std::size_t max_len = 0;
    for (const RunSummary& s : summaries[a])
      for (const auto& c : s.clearances) max_len = std::max(max_len, c.size());
    for (int o = 0; o < n_obs; ++o) {
      ClearanceEnvelope& env = envs[o];
      env.mean.assign(max_len, 0.0);
      env.min.assign(max_len, std::numeric_limits<double>::infinity());
      env.max.assign(max_len, -std::numeric_limits<double>::infinity());
      std::vector<int> counts(max_len, 0);
      for (const RunSummary& s : summaries[a]) {
        const auto& c = s.clearances[o];
        for (std::size_t k = 0; k < c.size(); ++k) {
          env.mean[k] += c[k];
          env.min[k] = std::min(env.min[k], c[k]);
          env.max[k] = std::max(env.max[k], c[k]);
          counts[k] += 1;
        }
      }
      for (std::size_t k = 0; k < max_len; ++k)
        if (counts[k] > 0) env.mean[k] /= counts[k];
    }
    report.envelopes.push_back(std::move(envs));
  }
  return report;
}

}  // namespace ncsafe
