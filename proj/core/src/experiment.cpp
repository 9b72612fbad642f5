#include "ncsafe/experiment.hpp"

#include <cmath>
#include <stdexcept>

namespace ncsafe {

using robot::Vector2d;
using robot::Vector3d;

ExperimentConfig default_experiment() {
  ExperimentConfig cfg;
  robot::Scenario& sc = cfg.scenario;
  sc.arm = robot::ArmModel{};
  sc.obstacles = {{Vector2d(0.45, 0.42), 0.10}, {Vector2d(0.20, 0.38), 0.10}};
  sc.waypoints = {Vector2d(0.62, 0.10), Vector2d(-0.25, 0.60)};
  sc.q0 = Vector3d(M_PI / 2.0, -M_PI / 6.0, -M_PI / 6.0);
  cfg.tau = 7;
  cfg.disturbance = DisturbanceSpec::low(2024);
  return cfg;
}

WaypointTracker::WaypointTracker(std::vector<Vector2d> waypoints, double threshold,
                                 robot::ArmModel arm)
    : waypoints_(std::move(waypoints)), threshold_(threshold), arm_(std::move(arm)) {
  if (waypoints_.empty()) throw std::invalid_argument("WaypointTracker: no waypoints");
  steps_.assign(waypoints_.size(), -1);
}

void WaypointTracker::observe(const Vec& x, int step) {
  const Vector2d ee = robot::end_effector(arm_, x);
  while (current_ < waypoints_.size() &&
         (ee - waypoints_[current_]).norm() < threshold_) {
    steps_[current_] = step;
    ++current_;
  }
}

bool WaypointTracker::complete() const { return current_ == waypoints_.size(); }

Vector2d WaypointTracker::current_target() const {
  if (current_ < waypoints_.size()) return waypoints_[current_];
  return waypoints_.back();  // hold the final waypoint
}

LoopSpec make_loop_spec(const ExperimentConfig& cfg, Architecture arch,
                        const Calibration* calib) {
  const robot::Scenario& sc = cfg.scenario;
  LoopSpec spec;
  spec.model = robot::make_system_model(sc.arm);
  if (calib) {
    spec.model.lipschitz_f = calib->lipschitz_f;
    spec.model.lipschitz_g = calib->lipschitz_g;
  }
  spec.model.input_norm_max = sc.input_limit;

  auto barriers = robot::build_barriers(sc, cfg.mpc.gamma);
  spec.barriers = barriers;
  spec.x0 = sc.initial_state();
  spec.tau = cfg.tau;
  spec.horizon_steps = sc.sim_horizon_steps;
  spec.ts = sc.arm.ts;
  spec.standby_input = Vec::Zero(3);
  spec.disturbance_dim = 3;

  // Disturbances are torques: they enter the state through g(x), so norm
  // bounds on the raw samples are torque-magnitude bounds.
  auto g_fn = spec.model.g;
  spec.inject = [g_fn](const Vec& x, const Vec& w_raw) -> Vec { return g_fn(x) * w_raw; };

  auto tracker = std::make_shared<WaypointTracker>(sc.waypoints, sc.reach_threshold, sc.arm);
  spec.tracker = tracker;

  const InputBound input_set = InputBound::ball(sc.input_limit);

  // Stage cost: waypoint tracking + velocity and effort regularization.
  const double sp = std::sqrt(cfg.mpc.weight_position);
  const double sv = std::sqrt(cfg.mpc.weight_velocity);
  const double su = std::sqrt(cfg.mpc.weight_input);
  const robot::ArmModel arm = sc.arm;
  auto stage_residuals = [tracker, arm, sp, sv, su](const Vec& x, const Vec& u) -> Vec {
    Vec r(8);
    const Vector2d ee = robot::end_effector(arm, x);
    const Vector2d tgt = tracker->current_target();
    r[0] = sp * (ee.x() - tgt.x());
    r[1] = sp * (ee.y() - tgt.y());
    r.segment<3>(2) = sv * x.tail<3>();
    r.segment<3>(5) = su * u;
    return r;
  };

  MPCConfig mpc;
  mpc.model = spec.model;
  mpc.horizon = cfg.mpc.horizon;
  mpc.stage_residuals = stage_residuals;
  mpc.stage_cost = [stage_residuals](const Vec& x, const Vec& u) {
    return stage_residuals(x, u).squaredNorm();
  };
  mpc.input_set = input_set;
  Box vel_box;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  vel_box.lo = Vec::Constant(6, -kInf);
  vel_box.hi = Vec::Constant(6, kInf);
  for (int i = 3; i < 6; ++i) {
    vel_box.lo[i] = -sc.joint_vel_limit;
    vel_box.hi[i] = sc.joint_vel_limit;
  }
  mpc.state_soft_box = vel_box;
  mpc.state_penalty_weight = cfg.mpc.weight_state_penalty;
  mpc.barriers = barriers;
  mpc.barrier_screen_margin = cfg.mpc.barrier_screen_margin;

  const bool needs_robust =
      arch == Architecture::RobustLocalCBF || arch == Architecture::Combined;
  if (needs_robust) {
    if (calib == nullptr)
      throw std::invalid_argument(
          "make_loop_spec: robust architectures need a tolerance calibration");
    spec.robust_filter = FilterConfig::robust_input_channel(barriers, spec.model,
                                                            input_set, calib->w_bar_l);
    spec.robust_filter.validate_at(spec.x0);
  }
  if (arch == Architecture::Combined) {
    RobustMPCParams rp;
    rp.w_bar_r = calib->input_gain * calib->w_bar_r;
    rp.w_bar_l = calib->input_gain * calib->w_bar_l;
    rp.slack_weight = cfg.mpc.rho;
    // Reserve control margin for the local corrections; cap the tightening
    // so the remote set never collapses.
    const double delta = std::min(calib->rho_u, 0.5 * sc.input_limit);
    rp.tightened_input = input_set.tightened(delta);
    mpc.robust = rp;
  }
  spec.mpc = mpc;
  spec.plain_filter = FilterConfig::plain(barriers, spec.model, input_set);

  return spec;
}

RunRecord run_single(const ExperimentConfig& cfg, Architecture arch,
                     const Calibration* calib, std::uint64_t run_index) {
  DisturbanceStream stream(cfg.disturbance, 3, run_index);
  std::vector<Vec> dist(cfg.scenario.sim_horizon_steps);
  for (auto& w : dist) w = stream.next();
  LoopSpec spec = make_loop_spec(cfg, arch, calib);
  return run(arch, spec, dist);
}

}  // namespace ncsafe
