#pragma once

#include <functional>
#include <memory>

#include "ncsafe/barrier.hpp"
#include "ncsafe/dynamics.hpp"
#include "ncsafe/qp.hpp"

namespace ncsafe {

// Plant-side safety filter configuration. `tighten` is the robustification
// margin added to every barrier constraint:
//   h_j(f(x) + g(x) u) >= (1 - gamma) h_j(x) + tighten(x).
// A null tighten means the plain filter (margin 0). The robust filter uses
// either a calibrated constant L_h * w_bar_l or the state-dependent
// self-consistent margin (1 - gamma) h(x).
struct FilterConfig {
  std::shared_ptr<const BarrierSet> barriers;
  SystemModel model;
  InputBound input_set;
  std::function<double(const Vec&)> tighten;
  SQPOptions sqp;

  static FilterConfig plain(std::shared_ptr<const BarrierSet> barriers,
                            SystemModel model, InputBound input_set);
  static FilterConfig robust_constant(std::shared_ptr<const BarrierSet> barriers,
                                      SystemModel model, InputBound input_set,
                                      double margin);
  // margin(x) = L_h * sigma_max(g(x)) * w_bar_input for disturbances that
  // enter through the input channel (torque-level bound).
  static FilterConfig robust_input_channel(std::shared_ptr<const BarrierSet> barriers,
                                           SystemModel model, InputBound input_set,
                                           double w_bar_input);
  // margin(x) = L_h * w_bar_l(x) = (1 - gamma) h(x), the pointwise Lemma-1
  // tolerance; requires gamma >= 1/2 for feasibility near the boundary.
  static FilterConfig robust_pointwise(std::shared_ptr<const BarrierSet> barriers,
                                       SystemModel model, InputBound input_set);

  // Throws when the tightening already exceeds gamma * h at x0, which would
  // make the filter infeasible from the very first step.
  void validate_at(const Vec& x0) const;
};

struct FilterResult {
  Vec u_applied;
  Vec u_reference;
  bool intervened = false;      // ||u_applied - u_reference|| > 1e-9
  double residual_before = 0.0;  // min_j constraint residual at u_reference
  double residual_after = 0.0;   // min_j constraint residual at u_applied
  SolveStatus status = SolveStatus::MaxIter;
  bool fallback = false;  // infeasible: max-min-residual input applied
};

// Minimally modifies u_ref so every member barrier satisfies the tightened
// discrete CBF condition on the nominal next state.
FilterResult filter(const FilterConfig& cfg, const Vec& x, const Vec& u_ref);

// Same problem with the robust margin; cfg.tighten must be set (use one of
// the robust_* constructors).
FilterResult robust_filter(const FilterConfig& cfg, const Vec& x, const Vec& u_ref);

}  // namespace ncsafe
