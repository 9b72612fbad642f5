#pragma once

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "ncsafe/barrier.hpp"
#include "ncsafe/dynamics.hpp"

namespace ncsafe {
namespace robot {

using Eigen::Matrix3d;
using Eigen::Vector2d;
using Eigen::Vector3d;

// Planar 3R arm, uniform-rod links, no gravity (horizontal plane):
//   M(q) qdd + C(q, qd) qd + damping qd = u + tau_d
struct ArmModel {
  Vector3d link_lengths{0.4, 0.3, 0.2};  // m
  Vector3d link_masses{1.0, 0.8, 0.5};   // kg
  double ts = 0.005;                     // s
  double damping = 0.05;                 // N m s / rad

  double reach() const { return link_lengths.sum(); }
};

// Joint positions p_0..p_3 (base, joint 2, joint 3, end-effector).
std::array<Vector2d, 4> joint_positions(const ArmModel& arm, const Vector3d& q);

Matrix3d mass_matrix(const ArmModel& arm, const Vector3d& q);
// dM/dq_k, exact (geometric Jacobian derivatives).
std::array<Matrix3d, 3> mass_matrix_derivatives(const ArmModel& arm, const Vector3d& q);
// Coriolis matrix from the Christoffel symbols of M.
Matrix3d coriolis_matrix(const ArmModel& arm, const Vector3d& q, const Vector3d& qd);

// Semi-implicit Euler step of the disturbed dynamics; x = (q, qd) in R^6,
// u in R^3 (torque), w in R^6 (state-additive disturbance).
Vec arm_step(const ArmModel& arm, const Vec& x, const Vec& u, const Vec& w);

// Control-affine wrapping: arm_step(x, u, w) == f(x) + g(x) u + w exactly,
// with g(x) = [ts^2 M^-1; ts M^-1]. Lipschitz metadata is left zero for the
// caller (calibration) to fill.
SystemModel make_system_model(const ArmModel& arm);

struct Obstacle {
  Vector2d center;
  double radius = 0.0;
};

// Full-body collision sample points: each link contributes its proximal
// joint and three interior points, plus the end-effector (13 points,
// link-major order).
std::vector<Vector2d> sample_points(const ArmModel& arm, const Vector3d& q);

// The bundled benchmark scenario (geometry, task, limits). Controller and
// network settings live in ExperimentConfig.
struct Scenario {
  ArmModel arm;
  std::vector<Obstacle> obstacles;
  std::vector<Vector2d> waypoints;
  Vector3d q0{M_PI / 2.0, -M_PI / 6.0, -M_PI / 6.0};
  double reach_threshold = 0.035;  // m
  double epsilon = 0.005;          // m, barrier safety margin
  int samples_per_link = 3;
  int sim_horizon_steps = 9000;  // 45 s at ts = 0.005
  double joint_vel_limit = 5.0;  // rad/s
  double input_limit = 5.0;      // N m (Euclidean torque bound)

  Vec initial_state() const;  // (q0, 0)
};

// One barrier per (sample point, obstacle) pair,
//   h = ||p(x) - O_i|| - (r_i + epsilon),
// with per-member Lipschitz constants from an analytic kinematic bound.
// Throws if the initial pose violates any member.
std::shared_ptr<BarrierSet> build_barriers(const Scenario& scenario, double gamma);

struct TaskStatus {
  int current_waypoint = 0;  // index of the next unreached waypoint
  bool reached_all = false;
  std::optional<int> reach_step;  // step at which the last waypoint was hit
  std::vector<int> waypoint_steps;  // per-waypoint consumption step
};

TaskStatus task_status(const Scenario& scenario, const std::vector<Vec>& trajectory);

// Distance from the closest sample point to an obstacle surface offset
// (used for trace logging and clearance envelopes).
double obstacle_clearance(const Scenario& scenario, const Vec& x, int obstacle_index);

Vector2d end_effector(const ArmModel& arm, const Vec& x);

}  // namespace robot
}  // namespace ncsafe
