#include "ncsafe/robot.hpp"

#include <cmath>
#include <stdexcept>

namespace ncsafe {
namespace robot {

namespace {

Vector2d perp(const Vector2d& v) { return Vector2d(-v.y(), v.x()); }

struct Kinematics {
  std::array<Vector2d, 4> p;   // joints + end-effector
  std::array<Vector2d, 3> com; // link centers of mass
};

Kinematics kinematics(const ArmModel& arm, const Vector3d& q) {
  Kinematics k;
  k.p[0].setZero();
  double theta = 0.0;
  for (int i = 0; i < 3; ++i) {
    theta += q[i];
    const Vector2d dir(std::cos(theta), std::sin(theta));
    k.p[i + 1] = k.p[i] + arm.link_lengths[i] * dir;
    k.com[i] = k.p[i] + 0.5 * arm.link_lengths[i] * dir;
  }
  return k;
}

// d(point)/dq_j for a point rigidly attached to link `link` (0-based):
// perp(point - p_j) for j <= link, zero otherwise.
Vector2d point_jacobian_col(const Kinematics& k, const Vector2d& point, int link, int j) {
  if (j > link) return Vector2d::Zero();
  return perp(point - k.p[j]);
}

}  // namespace

std::array<Vector2d, 4> joint_positions(const ArmModel& arm, const Vector3d& q) {
  return kinematics(arm, q).p;
}

Matrix3d mass_matrix(const ArmModel& arm, const Vector3d& q) {
  const Kinematics k = kinematics(arm, q);
  Matrix3d M = Matrix3d::Zero();
  for (int i = 0; i < 3; ++i) {
    const double m = arm.link_masses[i];
    const double inertia = m * arm.link_lengths[i] * arm.link_lengths[i] / 12.0;
    Eigen::Matrix<double, 2, 3> Jv;
    for (int j = 0; j < 3; ++j) Jv.col(j) = point_jacobian_col(k, k.com[i], i, j);
    M += m * Jv.transpose() * Jv;
    // Angular part: Jw has ones through column i.
    for (int a = 0; a <= i; ++a)
      for (int b = 0; b <= i; ++b) M(a, b) += inertia;
  }
  return M;
}

std::array<Matrix3d, 3> mass_matrix_derivatives(const ArmModel& arm, const Vector3d& q) {
  const Kinematics k = kinematics(arm, q);
  std::array<Matrix3d, 3> dM;
  dM.fill(Matrix3d::Zero());

  for (int i = 0; i < 3; ++i) {
    const double m = arm.link_masses[i];
    Eigen::Matrix<double, 2, 3> Jv;
    for (int j = 0; j < 3; ++j) Jv.col(j) = point_jacobian_col(k, k.com[i], i, j);

    for (int kq = 0; kq < 3; ++kq) {
      // dJv columns: perp(d com/dq_k - d p_{j}/dq_k).
      const Vector2d dcom = point_jacobian_col(k, k.com[i], i, kq);
      Eigen::Matrix<double, 2, 3> dJv;
      for (int j = 0; j < 3; ++j) {
        if (j > i) {
          dJv.col(j).setZero();
          continue;
        }
        // p_j moves with joints 1..j (columns 0..j-1).
        const Vector2d dpj = (kq <= j - 1) ? perp(k.p[j] - k.p[kq]) : Vector2d::Zero();
        dJv.col(j) = perp(dcom - dpj);
      }
      dM[kq] += m * (dJv.transpose() * Jv + Jv.transpose() * dJv);
    }
  }
  return dM;
}

Matrix3d coriolis_matrix(const ArmModel& arm, const Vector3d& q, const Vector3d& qd) {
  const auto dM = mass_matrix_derivatives(arm, q);
  Matrix3d C;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double cij = 0.0;
      for (int kq = 0; kq < 3; ++kq) {
        cij += 0.5 * (dM[kq](i, j) + dM[j](i, kq) - dM[i](j, kq)) * qd[kq];
      }
      C(i, j) = cij;
    }
  }
  return C;
}

namespace {

// Semi-implicit Euler in control-affine form:
//   qd+ = qd + ts M^-1 (u - C qd - damping qd)
//   q+  = q + ts qd+
// so f is the zero-torque flow and g = [ts^2 M^-1; ts M^-1]. arm_step is
// assembled as f(x) + g(x) u + w so the decomposition is exact by
// construction.
Vec drift(const ArmModel& arm, const Vec& x) {
  const Vector3d q = x.head<3>();
  const Vector3d qd = x.tail<3>();
  const Matrix3d M = mass_matrix(arm, q);
  const Matrix3d C = coriolis_matrix(arm, q, qd);
  const Vector3d qdd_free = M.inverse() * (-C * qd - arm.damping * qd);
  const Vector3d qd_next = qd + arm.ts * qdd_free;
  Vec out(6);
  out.head<3>() = q + arm.ts * qd_next;
  out.tail<3>() = qd_next;
  return out;
}

Mat input_gain(const ArmModel& arm, const Vec& x) {
  const Matrix3d Minv = mass_matrix(arm, Vector3d(x.head<3>())).inverse();
  Mat G(6, 3);
  G.topRows(3) = arm.ts * arm.ts * Minv;
  G.bottomRows(3) = arm.ts * Minv;
  return G;
}

}  // namespace

Vec arm_step(const ArmModel& arm, const Vec& x, const Vec& u, const Vec& w) {
  if (x.size() != 6 || u.size() != 3 || w.size() != 6)
    throw std::invalid_argument("arm_step: dimension mismatch");
  if (!x.allFinite()) throw std::invalid_argument("arm_step: non-finite state");
  return drift(arm, x) + input_gain(arm, x) * u + w;
}

SystemModel make_system_model(const ArmModel& arm) {
  SystemModel model;
  model.state_dim = 6;
  model.input_dim = 3;
  model.f = [arm](const Vec& x) -> Vec { return drift(arm, x); };
  model.g = [arm](const Vec& x) -> Mat { return input_gain(arm, x); };
  return model;
}

std::vector<Vector2d> sample_points(const ArmModel& arm, const Vector3d& q) {
  const Kinematics k = kinematics(arm, q);
  std::vector<Vector2d> pts;
  pts.reserve(13);
  for (int i = 0; i < 3; ++i) {
    pts.push_back(k.p[i]);  // proximal joint of link i
    for (int s = 1; s <= 3; ++s) {
      const double frac = static_cast<double>(s) / 4.0;
      pts.push_back(k.p[i] + frac * (k.p[i + 1] - k.p[i]));
    }
  }
  pts.push_back(k.p[3]);  // end-effector
  return pts;
}

Vec Scenario::initial_state() const {
  Vec x0(6);
  x0.head<3>() = q0;
  x0.tail<3>().setZero();
  return x0;
}

namespace {

// Conservative Lipschitz bound of a sample point's position w.r.t. the
// state: sqrt(sum_k d_k^2) with d_k the maximal distance from joint k to
// the point (straight-arm configuration).
double point_lipschitz_bound(const ArmModel& arm, int link, double frac) {
  double lip_sq = 0.0;
  for (int k = 0; k <= link; ++k) {
    double d = frac * arm.link_lengths[link];
    for (int i = k; i < link; ++i) d += arm.link_lengths[i];
    lip_sq += d * d;
  }
  return std::sqrt(lip_sq);
}

}  // namespace

std::shared_ptr<BarrierSet> build_barriers(const Scenario& scenario, double gamma) {
  if (scenario.obstacles.empty())
    throw std::invalid_argument("build_barriers: no obstacles");
  const ArmModel arm = scenario.arm;
  const double eps = scenario.epsilon;

  // Point metadata in sample_points order: (link, fraction along link).
  struct PointRef {
    int link;
    double frac;
  };
  std::vector<PointRef> refs;
  for (int i = 0; i < 3; ++i) {
    refs.push_back({i, 0.0});
    for (int s = 1; s <= 3; ++s) refs.push_back({i, static_cast<double>(s) / 4.0});
  }
  refs.push_back({2, 1.0});

  std::vector<BarrierFunction> members;
  const int n_obs = static_cast<int>(scenario.obstacles.size());
  for (int pi = 0; pi < static_cast<int>(refs.size()); ++pi) {
    for (int oi = 0; oi < n_obs; ++oi) {
      const Obstacle obs = scenario.obstacles[oi];
      const PointRef ref = refs[pi];
      BarrierFunction b;
      b.h = [arm, obs, eps, pi](const Vec& x) {
        const auto pts = sample_points(arm, Vector3d(x.head<3>()));
        return (pts[pi] - obs.center).norm() - (obs.radius + eps);
      };
      // The base joint is fixed; keep its member well-formed with a tiny
      // positive constant.
      const double lip = std::max(point_lipschitz_bound(arm, ref.link, ref.frac), 1e-9);
      b.lipschitz = lip;
      b.label = "p" + std::to_string(pi) + "_obs" + std::to_string(oi + 1);
      members.push_back(std::move(b));
    }
  }

  auto set = std::make_shared<BarrierSet>(std::move(members), gamma);

  // All members share one forward-kinematics pass.
  auto obstacles = scenario.obstacles;
  const int n_members = set->size();
  set->set_batch_evaluator([arm, obstacles, eps, n_members, n_obs](const Vec& x) -> Vec {
    const auto pts = sample_points(arm, Vector3d(x.head<3>()));
    Vec v(n_members);
    int row = 0;
    for (const auto& pt : pts) {
      for (int oi = 0; oi < n_obs; ++oi) {
        v[row++] = (pt - obstacles[oi].center).norm() - (obstacles[oi].radius + eps);
      }
    }
    return v;
  });

  const Vec x0 = scenario.initial_state();
  if (set->evaluate(x0) <= 0.0)
    throw std::invalid_argument("build_barriers: initial pose violates the safe set");
  return set;
}

TaskStatus task_status(const Scenario& scenario, const std::vector<Vec>& trajectory) {
  if (trajectory.empty()) throw std::invalid_argument("task_status: empty trajectory");
  TaskStatus st;
  st.waypoint_steps.assign(scenario.waypoints.size(), -1);
  std::size_t wp = 0;
  for (int k = 0; k < static_cast<int>(trajectory.size()) && wp < scenario.waypoints.size(); ++k) {
    const Vector2d ee = end_effector(scenario.arm, trajectory[k]);
    while (wp < scenario.waypoints.size() &&
           (ee - scenario.waypoints[wp]).norm() < scenario.reach_threshold) {
      st.waypoint_steps[wp] = k;
      ++wp;
    }
  }
  st.current_waypoint = static_cast<int>(wp);
  st.reached_all = wp == scenario.waypoints.size();
  if (st.reached_all) st.reach_step = st.waypoint_steps.back();
  return st;
}

double obstacle_clearance(const Scenario& scenario, const Vec& x, int obstacle_index) {
  const auto pts = sample_points(scenario.arm, Vector3d(x.head<3>()));
  const Obstacle& obs = scenario.obstacles.at(obstacle_index);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& pt : pts) best = std::min(best, (pt - obs.center).norm() - obs.radius);
  return best;
}

Vector2d end_effector(const ArmModel& arm, const Vec& x) {
  return kinematics(arm, Vector3d(x.head<3>())).p[3];
}

}  // namespace robot
}  // namespace ncsafe
