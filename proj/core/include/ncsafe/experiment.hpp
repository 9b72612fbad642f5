#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ncsafe/disturbance.hpp"
#include "ncsafe/loop.hpp"
#include "ncsafe/robot.hpp"

namespace ncsafe {

// Remote controller settings shared by all architectures of one experiment.
struct MPCSettings {
  int horizon = 5;            // N
  double gamma = 0.2;         // CBF decay rate
  double rho = 1e3;           // slack weight
  double weight_position = 100.0;
  double weight_velocity = 0.1;
  double weight_input = 0.01;
  double weight_state_penalty = 50.0;  // soft joint-velocity box
  double barrier_screen_margin = 0.08;
};

struct RunSettings {
  int n_runs = 20;
  std::vector<Architecture> architectures{Architecture::LocalCBF,
                                          Architecture::RemoteMPCCBF,
                                          Architecture::Combined};
};

// Full description of one benchmark experiment: plant scenario, network
// delay, controller knobs, disturbance regime, batch settings.
struct ExperimentConfig {
  robot::Scenario scenario;
  int tau = 7;
  MPCSettings mpc;
  DisturbanceSpec disturbance;
  RunSettings run;
};

// The bundled default experiment (geometry validated by the
// disturbance-free success regression).
ExperimentConfig default_experiment();

// Scenario-constant tolerance calibration output. Tolerances are expressed
// in torque units (disturbances enter the arm through the input channel);
// input_gain converts to the state-space bounds used by the robust
// controller pieces.
struct Calibration {
  double w_bar_l = 0.0;  // local tolerance, torque norm
  double w_bar_r = 0.0;  // remote tolerance, torque norm
  double eta_l = 0.0;    // min margin of the disturbance-free LocalCBF run
  double eta_r = 0.0;    // min margin of the disturbance-free RemoteMPCCBF run
  double lipschitz_h = 0.0;
  double lipschitz_f = 0.0;
  double lipschitz_g = 0.0;
  double input_gain = 0.0;   // max sigma(S g(x)) over the operating region
  double velocity_scale = 1.0;  // alpha of the scaled norm used for the estimates
  double rho_u = 0.0;        // input-tightening radius for the combined MPC
  Box operating_region;
};

// Waypoint-sequencing task used by the arm experiment; exposes the active
// target to the stage-cost closures.
class WaypointTracker : public TaskTracker {
 public:
  WaypointTracker(std::vector<robot::Vector2d> waypoints, double threshold,
                  robot::ArmModel arm);
  void observe(const Vec& x, int step) override;
  bool complete() const override;
  std::vector<int> waypoint_steps() const override { return steps_; }
  robot::Vector2d current_target() const;

 private:
  std::vector<robot::Vector2d> waypoints_;
  double threshold_;
  robot::ArmModel arm_;
  std::size_t current_ = 0;
  std::vector<int> steps_;
};

// Assembles the per-run loop for one architecture. The calibration is
// required by RobustLocalCBF and Combined (tightened constraints and input
// set); pass nullptr for the other architectures or to run the
// calibration's own disturbance-free probes.
LoopSpec make_loop_spec(const ExperimentConfig& cfg, Architecture arch,
                        const Calibration* calib);

// One full closed-loop run with disturbances drawn from cfg.disturbance
// for the given run index (torque-channel injection).
RunRecord run_single(const ExperimentConfig& cfg, Architecture arch,
                     const Calibration* calib, std::uint64_t run_index);

}  // namespace ncsafe
