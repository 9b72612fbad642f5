#include "ncsafe/bounds.hpp"

#include <limits>
#include <stdexcept>

namespace ncsafe {

namespace {

// Integer power by repeated multiplication; pow_i(x, 0) == 1 exactly and
// pow_i(x, 1) == x exactly, which clause 1 of the proposition relies on.
double pow_i(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

// sum_{i=1}^{n} L^{i-1}, empty sum for n = 0.
double geometric_sum(double L, int n) {
  double s = 0.0;
  double term = 1.0;
  for (int i = 0; i < n; ++i) {
    s += term;
    term *= L;
  }
  return s;
}

}  // namespace

double local_tolerance(const ToleranceInputs& t) {
  if (t.h_value < 0.0) throw std::invalid_argument("local_tolerance: negative margin");
  if (!(t.lipschitz_h > 0.0))
    throw std::invalid_argument("local_tolerance: L_h must be positive");
  return (1.0 - t.gamma) * t.h_value / t.lipschitz_h;
}

double gain_G(int tau, int l, double dynamics_gain) {
  if (l < 1) throw std::invalid_argument("gain_G: l must be >= 1");
  if (tau < 0) throw std::invalid_argument("gain_G: tau must be >= 0");
  return pow_i(dynamics_gain, l) * geometric_sum(dynamics_gain, tau) +
         geometric_sum(dynamics_gain, l);
}

double remote_tolerance(const ToleranceInputs& t, int l) {
  if (l < 1 || l > t.horizon)
    throw std::invalid_argument("remote_tolerance: l must be in 1..N");
  if (!(t.lipschitz_h > 0.0))
    throw std::invalid_argument("remote_tolerance: L_h must be positive");
  const double G = gain_G(t.tau, l, t.dynamics_gain());
  return pow_i(1.0 - t.gamma, l) * t.h_value / (t.lipschitz_h * G);
}

double remote_tolerance_horizon(const ToleranceInputs& t) {
  if (t.horizon < 1) throw std::invalid_argument("remote_tolerance_horizon: N must be >= 1");
  double best = std::numeric_limits<double>::infinity();
  for (int l = 1; l <= t.horizon; ++l) best = std::min(best, remote_tolerance(t, l));
  return best;
}

double prediction_error_bound(const ToleranceInputs& t, double w_bar) {
  if (w_bar < 0.0) throw std::invalid_argument("prediction_error_bound: negative w_bar");
  return w_bar * geometric_sum(t.dynamics_gain(), t.tau);
}

PropositionReport check_proposition(const ToleranceInputs& t) {
  PropositionReport rep;
  ToleranceInputs zero_delay = t;
  zero_delay.tau = 0;

  const double w_l = local_tolerance(t);
  const bool degenerate = (1.0 - t.gamma) == 0.0;

  ToleranceInputs one_step = zero_delay;
  one_step.horizon = 1;
  rep.clause1 = (remote_tolerance(one_step, 1) == w_l);

  rep.clause2 = true;
  rep.clause3 = (t.tau > 0);
  for (int l = 1; l <= t.horizon; ++l) {
    const double wr0 = remote_tolerance(zero_delay, l);
    rep.clause2 = rep.clause2 && (wr0 <= w_l);
    if (t.tau > 0) {
      const double wr = remote_tolerance(t, l);
      const bool strict = degenerate ? (wr == wr0) : (wr < wr0);
      rep.clause3 = rep.clause3 && strict && (wr0 <= w_l);
    }
  }
  if (t.tau == 0) rep.clause3 = true;  // vacuously true without delay
  return rep;
}

}  // namespace ncsafe
