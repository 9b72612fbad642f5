#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "ncsafe/barrier.hpp"
#include "ncsafe/dynamics.hpp"
#include "ncsafe/qp.hpp"

namespace ncsafe {

// Robustification parameters for the slacked MPC-CBF (state-unit bounds):
// barrier rows are tightened by L_h * w_bar_r and per-step slacks are
// capped at L_h * (w_bar_l - w_bar_r), penalized by slack_weight * delta^2.
struct RobustMPCParams {
  double w_bar_r = 0.0;
  double w_bar_l = 0.0;
  double slack_weight = 1e3;  // rho
  std::optional<InputBound> tightened_input;  // U (-) Delta U
};

struct MPCConfig {
  SystemModel model;
  int horizon = 1;  // N
  // Stage cost q(x_i, u_i), i = 0..N-1 with x_0 = x_hat, plus terminal
  // p(x_N). stage_residuals carries the least-squares structure
  // q = ||stage_residuals||^2 used for the Gauss-Newton Hessian; when
  // absent the SQP falls back to BFGS on stage_cost.
  std::function<double(const Vec&, const Vec&)> stage_cost;
  std::function<Vec(const Vec&, const Vec&)> stage_residuals;
  std::function<double(const Vec&)> terminal_cost;    // optional, default 0
  std::function<Vec(const Vec&)> terminal_residuals;  // optional
  InputBound input_set;
  // Soft state box (joint velocities for the arm): quadratic hinge penalty
  // inside the SQP, violations checked after the fact by the caller.
  std::optional<Box> state_soft_box;
  double state_penalty_weight = 0.0;
  std::shared_ptr<const BarrierSet> barriers;  // required by the CBF variants
  std::optional<RobustMPCParams> robust;       // required by the robust variant
  SQPOptions sqp;
  // Barrier members whose value along the warm-start trajectory stays above
  // this margin are left out of the constraint stack; the full stack is
  // re-checked after the solve and the problem re-solved unscreened if
  // anything slipped through.
  double barrier_screen_margin = std::numeric_limits<double>::infinity();
};

struct MPCSolution {
  std::vector<Vec> inputs;            // u_{0:N-1}
  std::vector<Vec> predicted_states;  // x_{1:N}
  Vec slacks;                         // empty unless robust
  double objective = 0.0;
  SolveStatus status = SolveStatus::MaxIter;
  int iterations = 0;
};

// Receding-horizon controller; keeps the shift-initialized warm start
// between solves. One instance per simulated loop.
class MPCController {
 public:
  explicit MPCController(MPCConfig cfg);

  MPCSolution solve_nominal(const Vec& x_hat);
  MPCSolution solve_mpc_cbf(const Vec& x_hat);
  MPCSolution solve_robust_mpc_cbf(const Vec& x_hat);

  void reset_warm_start();
  const MPCConfig& config() const { return cfg_; }

 private:
  enum class Variant { Nominal, CBF, RobustCBF };
  MPCSolution solve(const Vec& x_hat, Variant variant);

  MPCConfig cfg_;
  Vec warm_inputs_;  // stacked, empty before the first solve
  Vec warm_slacks_;
};

// One-shot conveniences matching the per-operation contracts.
MPCSolution solve_nominal(const MPCConfig& cfg, const Vec& x_hat);
MPCSolution solve_mpc_cbf(const MPCConfig& cfg, const Vec& x_hat);
MPCSolution solve_robust_mpc_cbf(const MPCConfig& cfg, const Vec& x_hat);

// Post-hoc check of the chained contraction h(x_l) >= (1-gamma)^l h(x_hat)
// on the composite barrier; returns the worst signed slack (>= -tol means
// the chain holds).
double chained_contraction_slack(const BarrierSet& barriers, const Vec& x_hat,
                                 const std::vector<Vec>& predicted_states);

}  // namespace ncsafe
