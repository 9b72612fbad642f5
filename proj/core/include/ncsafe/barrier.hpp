#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ncsafe/dynamics.hpp"

namespace ncsafe {

// Scalar barrier h with its Lipschitz constant; the safe set is {h >= 0}.
struct BarrierFunction {
  std::function<double(const Vec&)> h;
  double lipschitz = 0.0;  // L_h > 0
  std::string label;
};

// Composite safe set: intersection of the member superlevel sets, with the
// shared CBF decay rate gamma in (0, 1].
class BarrierSet {
 public:
  BarrierSet(std::vector<BarrierFunction> barriers, double gamma);

  // min over member values; >= 0 iff x is in the safe set.
  double evaluate(const Vec& x) const;

  // All member values at once. Uses the batch evaluator when one was
  // installed (robot barriers share a single forward-kinematics pass).
  Vec values(const Vec& x) const;

  // Composite discrete CBF residual h(x_next) - (1 - gamma) h(x).
  double cbf_residual(const Vec& x, const Vec& x_next) const;

  double gamma() const { return gamma_; }
  const std::vector<BarrierFunction>& members() const { return members_; }
  int size() const { return static_cast<int>(members_.size()); }

  // L_h used by the tolerance bounds: max over member constants.
  double max_lipschitz() const;

  void set_batch_evaluator(std::function<Vec(const Vec&)> batch) {
    batch_ = std::move(batch);
  }

 private:
  std::vector<BarrierFunction> members_;
  double gamma_;
  std::function<Vec(const Vec&)> batch_;
};

// Axis-aligned box region used for sampling.
struct Box {
  Vec lo, hi;
  bool degenerate() const { return lo.size() == 0 || (hi - lo).norm() == 0.0; }
};

// Empirical Lipschitz constant: max over sampled point pairs of
// ||fn(x) - fn(y)|| / ||x - y||, inflated by a safety factor. Pairs mix
// box-wide draws with short-range perturbations so both secant and
// near-tangent slopes are probed. Deterministic given the seed.
double estimate_lipschitz(const std::function<Vec(const Vec&)>& fn, const Box& region,
                          int n_samples, std::uint64_t seed, double inflation = 1.2);

double estimate_lipschitz_scalar(const std::function<double(const Vec&)>& fn,
                                 const Box& region, int n_samples, std::uint64_t seed,
                                 double inflation = 1.2);

// Matrix-valued variant; differences are measured in the induced 2-norm.
double estimate_lipschitz_matrix(const std::function<Mat(const Vec&)>& fn,
                                 const Box& region, int n_samples, std::uint64_t seed,
                                 double inflation = 1.2);

}  // namespace ncsafe
