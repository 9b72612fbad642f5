#include "ncsafe/safety.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace ncsafe {

FilterConfig FilterConfig::plain(std::shared_ptr<const BarrierSet> barriers,
                                 SystemModel model, InputBound input_set) {
  FilterConfig cfg;
  cfg.barriers = std::move(barriers);
  cfg.model = std::move(model);
  cfg.input_set = std::move(input_set);
  return cfg;
}

FilterConfig FilterConfig::robust_constant(std::shared_ptr<const BarrierSet> barriers,
                                           SystemModel model, InputBound input_set,
                                           double margin) {
  if (margin < 0.0) throw std::invalid_argument("FilterConfig: negative tightening");
  FilterConfig cfg = plain(std::move(barriers), std::move(model), std::move(input_set));
  cfg.tighten = [margin](const Vec&) { return margin; };
  return cfg;
}

FilterConfig FilterConfig::robust_input_channel(std::shared_ptr<const BarrierSet> barriers,
                                                SystemModel model, InputBound input_set,
                                                double w_bar_input) {
  if (w_bar_input < 0.0) throw std::invalid_argument("FilterConfig: negative w_bar");
  FilterConfig cfg = plain(barriers, model, std::move(input_set));
  const double lh = cfg.barriers->max_lipschitz();
  auto g = cfg.model.g;
  cfg.tighten = [lh, w_bar_input, g](const Vec& x) {
    const double gain = g(x).jacobiSvd().singularValues()[0];
    return lh * gain * w_bar_input;
  };
  return cfg;
}

FilterConfig FilterConfig::robust_pointwise(std::shared_ptr<const BarrierSet> barriers,
                                            SystemModel model, InputBound input_set) {
  FilterConfig cfg = plain(barriers, model, std::move(input_set));
  const double gamma = cfg.barriers->gamma();
  auto set = cfg.barriers;
  cfg.tighten = [gamma, set](const Vec& x) {
    return std::max(0.0, (1.0 - gamma) * set->evaluate(x));
  };
  return cfg;
}

void FilterConfig::validate_at(const Vec& x0) const {
  const double margin = tighten ? tighten(x0) : 0.0;
  const double h0 = barriers->evaluate(x0);
  if (margin >= barriers->gamma() * h0)
    throw std::invalid_argument(
        "FilterConfig: tightening margin >= gamma*h(x0); filter infeasible at start");
}

namespace {

// Constraint stack for a fixed plant state: next state is affine in u,
// x_next = fx + gx u, so each row is h_j(fx + gx u) - (1-gamma) h_j(x) - margin.
struct FilterStack {
  const BarrierSet* barriers;
  Vec fx;
  Mat gx;
  Vec floor_terms;  // (1-gamma) h_j(x) + margin per member
  const InputBound* input_set;

  Vec constraint_values(const Vec& u) const {
    const Vec x_next = fx + gx * u;
    Vec c = barriers->values(x_next) - floor_terms;
    if (input_set->kind == InputBound::Kind::Ball) {
      c.conservativeResize(c.size() + 1);
      c[c.size() - 1] = input_set->radius * input_set->radius - u.squaredNorm();
    }
    return c;
  }

  double min_barrier_residual(const Vec& u) const {
    const Vec x_next = fx + gx * u;
    return (barriers->values(x_next) - floor_terms).minCoeff();
  }
};

FilterResult run_filter(const FilterConfig& cfg, const Vec& x, const Vec& u_ref) {
  if (x.size() != cfg.model.state_dim)
    throw std::invalid_argument("filter: state dimension mismatch");
  if (u_ref.size() != cfg.model.input_dim)
    throw std::invalid_argument("filter: input dimension mismatch");

  const double gamma = cfg.barriers->gamma();
  const double margin = cfg.tighten ? cfg.tighten(x) : 0.0;

  FilterStack stack;
  stack.barriers = cfg.barriers.get();
  stack.fx = cfg.model.f(x);
  stack.gx = cfg.model.g(x);
  stack.floor_terms = (1.0 - gamma) * cfg.barriers->values(x);
  stack.floor_terms.array() += margin;
  stack.input_set = &cfg.input_set;

  FilterResult res;
  res.u_reference = u_ref;
  res.residual_before = stack.min_barrier_residual(u_ref);

  // Fast path: the reference already satisfies everything.
  if (res.residual_before >= 0.0 && cfg.input_set.contains(u_ref)) {
    res.u_applied = u_ref;
    res.intervened = false;
    res.residual_after = res.residual_before;
    res.status = SolveStatus::Optimal;
    return res;
  }

  NLPProblem nlp;
  nlp.residuals = [&u_ref](const Vec& u) { return Vec(u - u_ref); };
  nlp.ineq = [&stack](const Vec& u) { return stack.constraint_values(u); };
  nlp.ineq_dim = stack.barriers->size() +
                 (cfg.input_set.kind == InputBound::Kind::Ball ? 1 : 0);
  if (cfg.input_set.kind == InputBound::Kind::Box) {
    nlp.lower = cfg.input_set.lower;
    nlp.upper = cfg.input_set.upper;
  }

  SolveReport rep = solve_nlp_sqp(nlp, cfg.input_set.project(u_ref), cfg.sqp);

  if (rep.status == SolveStatus::Infeasible) {
    // Assumption-1 violation at runtime: fall back to the input that
    // maximizes the minimum barrier residual so the run can continue.
    const int m = cfg.model.input_dim;
    NLPProblem fb;
    fb.objective = [](const Vec& zt) { return -zt[zt.size() - 1]; };
    fb.ineq = [&stack, m](const Vec& zt) {
      const Vec u = zt.head(m);
      Vec c = stack.constraint_values(u);
      const double t = zt[zt.size() - 1];
      for (int j = 0; j < stack.barriers->size(); ++j) c[j] -= t;
      return c;
    };
    fb.ineq_dim = nlp.ineq_dim;
    constexpr double kBig = 1e6;
    fb.lower = Vec::Constant(m + 1, -kBig);
    fb.upper = Vec::Constant(m + 1, kBig);
    if (cfg.input_set.kind == InputBound::Kind::Box) {
      fb.lower.head(m) = cfg.input_set.lower;
      fb.upper.head(m) = cfg.input_set.upper;
    }
    Vec zt0(m + 1);
    zt0.head(m) = cfg.input_set.project(u_ref);
    zt0[m] = stack.min_barrier_residual(zt0.head(m));
    SQPOptions fb_opts = cfg.sqp;
    fb_opts.max_iterations = 80;
    SolveReport fb_rep = solve_nlp_sqp(fb, zt0, fb_opts);
    res.u_applied = cfg.input_set.project(fb_rep.solution.head(m));
    res.fallback = true;
    res.status = SolveStatus::Infeasible;
  } else {
    res.u_applied = rep.solution;
    res.status = rep.status;
  }

  res.residual_after = stack.min_barrier_residual(res.u_applied);
  res.intervened = (res.u_applied - u_ref).norm() > 1e-9;
  return res;
}

}  // namespace

FilterResult filter(const FilterConfig& cfg, const Vec& x, const Vec& u_ref) {
  return run_filter(cfg, x, u_ref);
}

FilterResult robust_filter(const FilterConfig& cfg, const Vec& x, const Vec& u_ref) {
  if (!cfg.tighten)
    throw std::invalid_argument("robust_filter: config has no tightening margin");
  return run_filter(cfg, x, u_ref);
}

}  // namespace ncsafe
