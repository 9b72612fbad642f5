#include "ncsafe/loop.hpp"

#include <cmath>
#include <stdexcept>

namespace ncsafe {

const char* to_string(Architecture a) {
  switch (a) {
    case Architecture::NominalMPC: return "nominal_mpc";
    case Architecture::LocalCBF: return "local_cbf";
    case Architecture::RemoteMPCCBF: return "mpc_cbf";
    case Architecture::RobustLocalCBF: return "robust_local_cbf";
    case Architecture::Combined: return "combined";
  }
  return "?";
}

Architecture architecture_from_string(const std::string& name) {
  if (name == "nominal_mpc") return Architecture::NominalMPC;
  if (name == "local_cbf") return Architecture::LocalCBF;
  if (name == "mpc_cbf") return Architecture::RemoteMPCCBF;
  if (name == "robust_local_cbf") return Architecture::RobustLocalCBF;
  if (name == "combined") return Architecture::Combined;
  throw std::invalid_argument("unknown architecture: " + name);
}

void ChannelState::enqueue_measurement(int step, const Vec& x) {
  measurement_line_.emplace_back(step, x);
  while (static_cast<int>(measurement_line_.size()) > tau_ + 1) measurement_line_.pop_front();
}

const Vec* ChannelState::delayed_measurement(int step) const {
  const int wanted = step - tau_;
  if (wanted < 0) return nullptr;
  for (const auto& [s, x] : measurement_line_) {
    if (s == wanted) return &x;
  }
  return nullptr;
}

void ChannelState::record_sent_input(const Vec& u, bool warmup) {
  input_line_.push_back({u, warmup});
  while (static_cast<int>(input_line_.size()) > tau_) input_line_.pop_front();
}

namespace {

struct ArchPlan {
  enum class Remote { Nominal, CBF, RobustCBF } remote;
  enum class Local { None, Plain, Robust } local;
};

ArchPlan plan(Architecture a) {
  switch (a) {
    case Architecture::NominalMPC:
      return {ArchPlan::Remote::Nominal, ArchPlan::Local::None};
    case Architecture::LocalCBF:
      return {ArchPlan::Remote::Nominal, ArchPlan::Local::Plain};
    case Architecture::RemoteMPCCBF:
      return {ArchPlan::Remote::CBF, ArchPlan::Local::None};
    case Architecture::RobustLocalCBF:
      return {ArchPlan::Remote::Nominal, ArchPlan::Local::Robust};
    case Architecture::Combined:
      return {ArchPlan::Remote::RobustCBF, ArchPlan::Local::Robust};
  }
  throw std::logic_error("unreachable");
}

FilterResult passthrough(const Vec& x, const Vec& u_remote) {
  (void)x;
  FilterResult r;
  r.u_applied = u_remote;
  r.u_reference = u_remote;
  r.intervened = false;
  r.residual_before = 0.0;
  r.residual_after = 0.0;
  r.status = SolveStatus::Optimal;
  return r;
}

}  // namespace

FilterResult architecture_stage(Architecture arch, const LoopSpec& spec, const Vec& x,
                                const Vec& u_remote) {
  switch (plan(arch).local) {
    case ArchPlan::Local::None: return passthrough(x, u_remote);
    case ArchPlan::Local::Plain: return filter(spec.plain_filter, x, u_remote);
    case ArchPlan::Local::Robust: return robust_filter(spec.robust_filter, x, u_remote);
  }
  throw std::logic_error("unreachable");
}

RunRecord run(Architecture arch, LoopSpec& spec, const std::vector<Vec>& disturbances) {
  const ArchPlan arch_plan = plan(arch);
  const int n = spec.model.state_dim;
  const int dist_dim = spec.disturbance_dim > 0 ? spec.disturbance_dim : n;
  if (static_cast<int>(disturbances.size()) < spec.horizon_steps)
    throw std::invalid_argument("run: disturbance sequence shorter than the horizon");
  if (spec.barriers->evaluate(spec.x0) <= 0.0)
    throw std::invalid_argument("run: initial state not strictly inside the safe set");

  MPCController mpc(spec.mpc);
  ChannelState channel(spec.tau);

  RunRecord rec;
  rec.states.reserve(spec.horizon_steps + 1);
  rec.steps.reserve(spec.horizon_steps);

  Vec x = spec.x0;
  rec.states.push_back(x);
  rec.min_h = spec.barriers->evaluate(x);
  if (spec.tracker) spec.tracker->observe(x, 0);

  auto replay_local = [&](const Vec& xj, const ChannelState::SentInput& sent) -> Vec {
    if (sent.warmup) return sent.u;
    switch (arch_plan.local) {
      case ArchPlan::Local::None: return sent.u;
      case ArchPlan::Local::Plain: return filter(spec.plain_filter, xj, sent.u).u_applied;
      case ArchPlan::Local::Robust:
        return robust_filter(spec.robust_filter, xj, sent.u).u_applied;
    }
    return sent.u;
  };

  for (int k = 0; k < spec.horizon_steps; ++k) {
    StepLog log;
    log.x = x;
    log.h = spec.barriers->evaluate(x);
    log.w_raw = disturbances[k].size() == dist_dim
                    ? disturbances[k]
                    : Vec(Vec::Zero(dist_dim));

    channel.enqueue_measurement(k, x);

    Vec u_remote;
    bool warmup = false;
    const Vec* x_meas = channel.delayed_measurement(k);
    if (x_meas == nullptr) {
      u_remote = spec.standby_input;
      warmup = true;
      log.warmup = true;
    } else {
      // Predictor: roll the delayed measurement through the inputs the
      // plant actually applied, replaying this architecture's local stage.
      Vec x_hat = *x_meas;
      try {
        for (const auto& sent : channel.input_line()) {
          const Vec u_applied_j = replay_local(x_hat, sent);
          x_hat = spec.model.f(x_hat) + spec.model.g(x_hat) * u_applied_j;
        }
        log.x_hat = x_hat;

        MPCSolution sol;
        switch (arch_plan.remote) {
          case ArchPlan::Remote::Nominal: sol = mpc.solve_nominal(x_hat); break;
          case ArchPlan::Remote::CBF: sol = mpc.solve_mpc_cbf(x_hat); break;
          case ArchPlan::Remote::RobustCBF: sol = mpc.solve_robust_mpc_cbf(x_hat); break;
        }
        u_remote = sol.inputs.front();
        log.mpc_status = sol.status;
        if (sol.slacks.size() > 0) log.slack_sum = sol.slacks.sum();
      } catch (const std::exception& e) {
        rec.aborted = true;
        rec.abort_reason = e.what();
        break;
      }
    }
    channel.record_sent_input(u_remote, warmup);
    log.u_remote = u_remote;

    Vec u_applied;
    if (warmup) {
      u_applied = u_remote;  // standby torque, applied unfiltered
    } else {
      try {
        FilterResult fr = architecture_stage(arch, spec, x, u_remote);
        u_applied = fr.u_applied;
        log.intervened = fr.intervened;
        log.filter_status = fr.status;
        log.filter_fallback = fr.fallback;
      } catch (const std::exception& e) {
        rec.aborted = true;
        rec.abort_reason = e.what();
        break;
      }
    }
    log.u_applied = u_applied;

    const Vec w_state = spec.inject ? spec.inject(x, log.w_raw) : log.w_raw;
    x = step(spec.model, x, u_applied, w_state);

    rec.steps.push_back(std::move(log));
    rec.states.push_back(x);
    rec.min_h = std::min(rec.min_h, spec.barriers->evaluate(x));

    if (spec.tracker) {
      spec.tracker->observe(x, k + 1);
      if (spec.tracker->complete()) break;
    }
  }

  rec.completion_step = static_cast<int>(rec.steps.size());
  rec.safety_violated = rec.min_h < 0.0;

  // Peak input jerk, skipping the warm-up regime change.
  double peak = 0.0;
  for (std::size_t k = 1; k < rec.steps.size(); ++k) {
    if (static_cast<int>(k) < spec.tau + 1) continue;
    const Vec d = (rec.steps[k].u_applied - rec.steps[k - 1].u_applied) / spec.ts;
    if (d.size() > 0) peak = std::max(peak, d.cwiseAbs().maxCoeff());
  }
  rec.peak_jerk = peak;

  if (spec.tracker) {
    rec.waypoint_steps = spec.tracker->waypoint_steps();
    rec.reached_all = spec.tracker->complete();
  }
  return rec;
}

}  // namespace ncsafe
