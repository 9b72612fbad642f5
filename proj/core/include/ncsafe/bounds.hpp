#pragma once

namespace ncsafe {

// Inputs to the disturbance-tolerance formulas, evaluated at a state with
// barrier margin eta = h(x).
struct ToleranceInputs {
  double h_value = 0.0;       // eta >= 0
  double gamma = 0.0;         // (0, 1]
  double lipschitz_h = 0.0;   // L_h > 0
  double lipschitz_f = 0.0;   // L_f >= 0
  double lipschitz_g = 0.0;   // L_g >= 0
  double input_norm_max = 0.0;  // u_bar > 0
  int tau = 0;                // round-trip delay, >= 0
  int horizon = 1;            // N >= 1

  double dynamics_gain() const { return lipschitz_f + lipschitz_g * input_norm_max; }
};

// Local CBF tolerance w_l = (1 - gamma) eta / L_h.
double local_tolerance(const ToleranceInputs& t);

// Error-propagation gain G(tau, l) = L_d^l sum_{i=1}^tau L_d^{i-1}
//                                   + sum_{j=1}^l L_d^{j-1}.
double gain_G(int tau, int l, double dynamics_gain);

// Remote MPC-CBF tolerance at horizon step l:
// w_r = (1 - gamma)^l eta / (L_h G(tau, l)).
double remote_tolerance(const ToleranceInputs& t, int l);

// Binding remote bound: min over l = 1..N of remote_tolerance.
double remote_tolerance_horizon(const ToleranceInputs& t);

// Predictor error bound ||e_tau|| <= w_bar sum_{i=1}^tau L_d^{i-1}.
double prediction_error_bound(const ToleranceInputs& t, double w_bar);

// The three clauses of the architectural disturbance-tolerance comparison:
//  1. w_r(chi, 0, 1) == w_l(chi) exactly.
//  2. w_r(chi, 0, l) <= w_l(chi) for all l in 1..N.
//  3. for tau > 0: w_r(chi, tau, l) < w_r(chi, 0, l) <= w_l(chi) for all l.
// At gamma == 1 every tolerance is zero and the clauses hold degenerately.
struct PropositionReport {
  bool clause1 = false;
  bool clause2 = false;
  bool clause3 = false;
  bool all() const { return clause1 && clause2 && clause3; }
};

PropositionReport check_proposition(const ToleranceInputs& t);

}  // namespace ncsafe
