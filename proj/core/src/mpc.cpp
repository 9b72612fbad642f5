#include "ncsafe/mpc.hpp"

#include <cmath>
#include <stdexcept>

namespace ncsafe {

namespace {

double pow_i(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace

double chained_contraction_slack(const BarrierSet& barriers, const Vec& x_hat,
                                 const std::vector<Vec>& predicted_states) {
  const double h0 = barriers.evaluate(x_hat);
  const double decay = 1.0 - barriers.gamma();
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t l = 1; l <= predicted_states.size(); ++l) {
    const double h_l = barriers.evaluate(predicted_states[l - 1]);
    worst = std::min(worst, h_l - pow_i(decay, static_cast<int>(l)) * h0);
  }
  return worst;
}

namespace {

// Single-shooting transcription: decision vector is the stacked input
// sequence (plus per-step slacks for the robust variant); states are
// eliminated by rolling out the nominal dynamics.
class ShootingProblem {
 public:
  enum class Kind { Nominal, CBF, RobustCBF };

  ShootingProblem(const MPCConfig& cfg, Vec x_hat, Kind kind,
                  std::vector<int> members)
      : cfg_(cfg), x_hat_(std::move(x_hat)), kind_(kind), members_(std::move(members)) {
    N_ = cfg.horizon;
    m_ = cfg.model.input_dim;
    n_slack_ = (kind_ == Kind::RobustCBF) ? N_ : 0;
    nz_ = N_ * m_ + n_slack_;

    if (kind_ != Kind::Nominal) {
      if (!cfg_.barriers) throw std::invalid_argument("mpc: CBF variant without barriers");
      gamma_ = cfg_.barriers->gamma();
      if (kind_ == Kind::RobustCBF) {
        if (!cfg_.robust) throw std::invalid_argument("mpc: robust variant without parameters");
        const double lh = cfg_.barriers->max_lipschitz();
        margin_ = lh * cfg_.robust->w_bar_r;
        slack_cap_ = lh * (cfg_.robust->w_bar_l - cfg_.robust->w_bar_r);
        if (slack_cap_ < -1e-12)
          throw std::invalid_argument("mpc: robust parameters require w_bar_r <= w_bar_l");
        slack_cap_ = std::max(0.0, slack_cap_);
      }
    }

    const InputBound& set = input_set();
    ball_rows_ = (set.kind == InputBound::Kind::Ball) ? N_ : 0;
    n_ineq_ = static_cast<int>(members_.size()) * N_ + ball_rows_;
  }

  int nz() const { return nz_; }
  int n_ineq() const { return n_ineq_; }
  int n_slack() const { return n_slack_; }

  const InputBound& input_set() const {
    if (kind_ == Kind::RobustCBF && cfg_.robust->tightened_input)
      return *cfg_.robust->tightened_input;
    return cfg_.input_set;
  }

  void variable_bounds(Vec& lower, Vec& upper) const {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    const InputBound& set = input_set();
    const bool boxed = set.kind == InputBound::Kind::Box;
    if (!boxed && n_slack_ == 0) return;  // fully unbounded variables
    lower = Vec::Constant(nz_, -kInf);
    upper = Vec::Constant(nz_, kInf);
    if (boxed) {
      for (int i = 0; i < N_; ++i) {
        lower.segment(i * m_, m_) = set.lower;
        upper.segment(i * m_, m_) = set.upper;
      }
    }
    for (int i = 0; i < n_slack_; ++i) {
      lower[N_ * m_ + i] = 0.0;
      upper[N_ * m_ + i] = slack_cap_;
    }
  }

  void rollout_states(const Vec& z, std::vector<Vec>& states) const {
    states.resize(N_ + 1);
    states[0] = x_hat_;
    for (int i = 0; i < N_; ++i) {
      const Vec u = z.segment(i * m_, m_);
      states[i + 1] = cfg_.model.f(states[i]) + cfg_.model.g(states[i]) * u;
    }
  }

  // Fused residual/constraint evaluation sharing one rollout.
  void evaluate(const Vec& z, Vec& residuals, Vec& ineq) const {
    rollout_states(z, scratch_states_);
    const auto& xs = scratch_states_;

    // Residual layout: [stage blocks | terminal | soft box | slacks].
    std::vector<double> res;
    res.reserve(64);
    for (int i = 0; i < N_; ++i) {
      const Vec u = z.segment(i * m_, m_);
      if (cfg_.stage_residuals) {
        const Vec r = cfg_.stage_residuals(xs[i], u);
        res.insert(res.end(), r.data(), r.data() + r.size());
      }
    }
    if (cfg_.terminal_residuals) {
      const Vec r = cfg_.terminal_residuals(xs[N_]);
      res.insert(res.end(), r.data(), r.data() + r.size());
    }
    if (cfg_.state_soft_box && cfg_.state_penalty_weight > 0.0) {
      const double w = std::sqrt(cfg_.state_penalty_weight);
      const Box& box = *cfg_.state_soft_box;
      for (int i = 1; i <= N_; ++i) {
        for (int d = 0; d < xs[i].size(); ++d) {
          const double below = box.lo[d] - xs[i][d];
          const double above = xs[i][d] - box.hi[d];
          res.push_back(w * std::max({0.0, below, above}));
        }
      }
    }
    if (n_slack_ > 0) {
      const double w = std::sqrt(cfg_.robust->slack_weight);
      for (int i = 0; i < n_slack_; ++i) res.push_back(w * z[N_ * m_ + i]);
    }
    residuals = Eigen::Map<const Vec>(res.data(), static_cast<Eigen::Index>(res.size()));

    ineq.resize(n_ineq_);
    int row = 0;
    if (!members_.empty()) {
      scratch_values_.resize(N_ + 1);
      for (int i = 0; i <= N_; ++i) scratch_values_[i] = cfg_.barriers->values(xs[i]);
      for (int i = 0; i < N_; ++i) {
        const double delta = (n_slack_ > 0) ? z[N_ * m_ + i] : 0.0;
        for (int j : members_) {
          ineq[row++] = scratch_values_[i + 1][j] -
                        (1.0 - gamma_) * scratch_values_[i][j] - margin_ + delta;
        }
      }
    }
    if (ball_rows_ > 0) {
      const double r2 = input_set().radius * input_set().radius;
      for (int i = 0; i < N_; ++i) {
        const Vec u = z.segment(i * m_, m_);
        ineq[row++] = r2 - u.squaredNorm();
      }
    }
  }

  // Spec-level objective (stage + terminal + slack penalty, no soft-box
  // regularization term).
  double reported_objective(const Vec& z) const {
    rollout_states(z, scratch_states_);
    const auto& xs = scratch_states_;
    double obj = 0.0;
    for (int i = 0; i < N_; ++i) {
      const Vec u = z.segment(i * m_, m_);
      if (cfg_.stage_cost) {
        obj += cfg_.stage_cost(xs[i], u);
      } else if (cfg_.stage_residuals) {
        obj += cfg_.stage_residuals(xs[i], u).squaredNorm();
      }
    }
    if (cfg_.terminal_cost) obj += cfg_.terminal_cost(xs[N_]);
    else if (cfg_.terminal_residuals) obj += cfg_.terminal_residuals(xs[N_]).squaredNorm();
    if (n_slack_ > 0)
      obj += cfg_.robust->slack_weight * z.tail(n_slack_).squaredNorm();
    return obj;
  }

 private:
  const MPCConfig& cfg_;
  Vec x_hat_;
  Kind kind_;
  std::vector<int> members_;  // screened barrier member indices
  int N_ = 0, m_ = 0, nz_ = 0, n_slack_ = 0, n_ineq_ = 0, ball_rows_ = 0;
  double gamma_ = 0.0, margin_ = 0.0, slack_cap_ = 0.0;
  mutable std::vector<Vec> scratch_states_;
  mutable std::vector<Vec> scratch_values_;
};

}  // namespace

MPCController::MPCController(MPCConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.horizon < 1) throw std::invalid_argument("mpc: horizon must be >= 1");
  if (cfg_.robust) {
    if (cfg_.robust->slack_weight < 0.0)
      throw std::invalid_argument("mpc: slack weight must be nonnegative");
    if (cfg_.robust->w_bar_r > cfg_.robust->w_bar_l + 1e-12)
      throw std::invalid_argument("mpc: robust parameters require w_bar_r <= w_bar_l");
  }
}

void MPCController::reset_warm_start() {
  warm_inputs_.resize(0);
  warm_slacks_.resize(0);
}

MPCSolution MPCController::solve_nominal(const Vec& x_hat) {
  return solve(x_hat, Variant::Nominal);
}
MPCSolution MPCController::solve_mpc_cbf(const Vec& x_hat) {
  return solve(x_hat, Variant::CBF);
}
MPCSolution MPCController::solve_robust_mpc_cbf(const Vec& x_hat) {
  return solve(x_hat, Variant::RobustCBF);
}

MPCSolution MPCController::solve(const Vec& x_hat, Variant variant) {
  const int N = cfg_.horizon;
  const int m = cfg_.model.input_dim;
  if (x_hat.size() != cfg_.model.state_dim)
    throw std::invalid_argument("mpc: state dimension mismatch");

  const ShootingProblem::Kind kind =
      variant == Variant::Nominal  ? ShootingProblem::Kind::Nominal
      : variant == Variant::CBF    ? ShootingProblem::Kind::CBF
                                   : ShootingProblem::Kind::RobustCBF;

  // Warm start: previous plan shifted by one step, padded with its last
  // input.
  Vec warm = Vec::Zero(N * m);
  if (warm_inputs_.size() == N * m) {
    warm.head((N - 1) * m) = warm_inputs_.tail((N - 1) * m);
    warm.tail(m) = warm_inputs_.tail(m);
  }

  // Barrier screening against the warm-start trajectory.
  std::vector<int> members;
  if (kind != ShootingProblem::Kind::Nominal) {
    const int count = cfg_.barriers->size();
    if (std::isfinite(cfg_.barrier_screen_margin)) {
      std::vector<double> min_h(count, std::numeric_limits<double>::infinity());
      Vec x = x_hat;
      Vec v = cfg_.barriers->values(x);
      for (int j = 0; j < count; ++j) min_h[j] = std::min(min_h[j], v[j]);
      for (int i = 0; i < N; ++i) {
        x = cfg_.model.f(x) + cfg_.model.g(x) * warm.segment(i * m, m);
        v = cfg_.barriers->values(x);
        for (int j = 0; j < count; ++j) min_h[j] = std::min(min_h[j], v[j]);
      }
      for (int j = 0; j < count; ++j)
        if (min_h[j] < cfg_.barrier_screen_margin) members.push_back(j);
    } else {
      members.resize(count);
      for (int j = 0; j < count; ++j) members[j] = j;
    }
  }

  auto attempt = [&](const std::vector<int>& active_members) {
    ShootingProblem shoot(cfg_, x_hat, kind, active_members);
    Vec z0 = Vec::Zero(shoot.nz());
    z0.head(N * m) = warm;
    if (shoot.n_slack() > 0 && warm_slacks_.size() == shoot.n_slack())
      z0.tail(shoot.n_slack()) = warm_slacks_;

    NLPProblem nlp;
    nlp.fused = [&shoot](const Vec& z, Vec& r, Vec& c) { shoot.evaluate(z, r, c); };
    nlp.ineq_dim = shoot.n_ineq();
    shoot.variable_bounds(nlp.lower, nlp.upper);

    SolveReport rep = solve_nlp_sqp(nlp, z0, cfg_.sqp);
    return std::pair<SolveReport, ShootingProblem>(std::move(rep), std::move(shoot));
  };

  auto [rep, shoot] = attempt(members);

  // If screening dropped a member that ends up violated, redo with the
  // full stack.
  if (kind != ShootingProblem::Kind::Nominal &&
      static_cast<int>(members.size()) < cfg_.barriers->size()) {
    std::vector<int> all(cfg_.barriers->size());
    for (int j = 0; j < cfg_.barriers->size(); ++j) all[j] = j;
    ShootingProblem full(cfg_, x_hat, kind, all);
    Vec z_full = Vec::Zero(full.nz());
    z_full.head(N * m) = rep.solution.head(N * m);
    if (full.n_slack() > 0) z_full.tail(full.n_slack()) = rep.solution.tail(full.n_slack());
    Vec r, c;
    full.evaluate(z_full, r, c);
    if (c.size() > 0 && c.minCoeff() < -cfg_.sqp.constraint_tol) {
      auto retry = attempt(all);
      rep = std::move(retry.first);
    }
  }

  MPCSolution sol;
  sol.status = rep.status;
  sol.iterations = rep.iterations;
  sol.inputs.resize(N);
  for (int i = 0; i < N; ++i) sol.inputs[i] = rep.solution.segment(i * m, m);
  std::vector<Vec> states;
  {
    ShootingProblem report_shoot(cfg_, x_hat, kind,
                                 std::vector<int>{});
    report_shoot.rollout_states(rep.solution, states);
    sol.objective = report_shoot.reported_objective(rep.solution);
  }
  sol.predicted_states.assign(states.begin() + 1, states.end());
  if (kind == ShootingProblem::Kind::RobustCBF)
    sol.slacks = rep.solution.tail(N);

  warm_inputs_ = rep.solution.head(N * m);
  if (kind == ShootingProblem::Kind::RobustCBF) warm_slacks_ = rep.solution.tail(N);
  return sol;
}

MPCSolution solve_nominal(const MPCConfig& cfg, const Vec& x_hat) {
  MPCController c(cfg);
  return c.solve_nominal(x_hat);
}
MPCSolution solve_mpc_cbf(const MPCConfig& cfg, const Vec& x_hat) {
  MPCController c(cfg);
  return c.solve_mpc_cbf(x_hat);
}
MPCSolution solve_robust_mpc_cbf(const MPCConfig& cfg, const Vec& x_hat) {
  MPCController c(cfg);
  return c.solve_robust_mpc_cbf(x_hat);
}

}  // namespace ncsafe
