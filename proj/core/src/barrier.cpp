#include "ncsafe/barrier.hpp"

#include <Eigen/SVD>
#include <limits>
#include <stdexcept>

#include "ncsafe/rng.hpp"

namespace ncsafe {

BarrierSet::BarrierSet(std::vector<BarrierFunction> barriers, double gamma)
    : members_(std::move(barriers)), gamma_(gamma) {
  if (members_.empty()) throw std::invalid_argument("BarrierSet: empty barrier list");
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw std::invalid_argument("BarrierSet: gamma must be in (0, 1]");
  for (const auto& b : members_) {
    if (!(b.lipschitz > 0.0))
      throw std::invalid_argument("BarrierSet: member Lipschitz constant must be positive");
  }
}

double BarrierSet::evaluate(const Vec& x) const {
  if (batch_) return batch_(x).minCoeff();
  double v = std::numeric_limits<double>::infinity();
  for (const auto& b : members_) v = std::min(v, b.h(x));
  return v;
}

Vec BarrierSet::values(const Vec& x) const {
  if (batch_) return batch_(x);
  Vec v(size());
  for (int i = 0; i < size(); ++i) v[i] = members_[i].h(x);
  return v;
}

double BarrierSet::cbf_residual(const Vec& x, const Vec& x_next) const {
  return evaluate(x_next) - (1.0 - gamma_) * evaluate(x);
}

double BarrierSet::max_lipschitz() const {
  double v = 0.0;
  for (const auto& b : members_) v = std::max(v, b.lipschitz);
  return v;
}

namespace {

Vec sample_in_box(const Box& region, SplitMix64& rng) {
  Vec x(region.lo.size());
  for (int i = 0; i < x.size(); ++i) x[i] = rng.next_uniform(region.lo[i], region.hi[i]);
  return x;
}

double estimate_impl(const std::function<double(const Vec&, const Vec&)>& diff_norm,
                     const Box& region, int n_samples, std::uint64_t seed,
                     double inflation) {
  if (region.lo.size() == 0 || region.lo.size() != region.hi.size())
    throw std::invalid_argument("estimate_lipschitz: malformed region");
  if ((region.hi - region.lo).minCoeff() < 0.0)
    throw std::invalid_argument("estimate_lipschitz: inverted region bounds");
  if (region.degenerate())
    throw std::invalid_argument("estimate_lipschitz: zero-measure region");
  if (n_samples < 2) throw std::invalid_argument("estimate_lipschitz: n_samples must be >= 2");

  SplitMix64 rng(seed);
  const double short_range = 1e-3 * (region.hi - region.lo).norm();
  double best = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    const Vec x = sample_in_box(region, rng);
    Vec y;
    if (s % 2 == 0) {
      y = sample_in_box(region, rng);
    } else {
      // Short-range partner probes near-tangent slopes.
      Vec dir(x.size());
      for (int i = 0; i < dir.size(); ++i) dir[i] = rng.next_normal();
      const double n = dir.norm();
      if (n == 0.0) continue;
      y = x + dir * (short_range / n);
      y = y.cwiseMax(region.lo).cwiseMin(region.hi);
    }
    const double dx = (x - y).norm();
    if (dx == 0.0) continue;
    best = std::max(best, diff_norm(x, y) / dx);
  }
  return inflation * best;
}

}  // namespace

double estimate_lipschitz(const std::function<Vec(const Vec&)>& fn, const Box& region,
                          int n_samples, std::uint64_t seed, double inflation) {
  return estimate_impl(
      [&fn](const Vec& x, const Vec& y) { return (fn(x) - fn(y)).norm(); }, region,
      n_samples, seed, inflation);
}

double estimate_lipschitz_scalar(const std::function<double(const Vec&)>& fn,
                                 const Box& region, int n_samples, std::uint64_t seed,
                                 double inflation) {
  return estimate_impl(
      [&fn](const Vec& x, const Vec& y) { return std::abs(fn(x) - fn(y)); }, region,
      n_samples, seed, inflation);
}

double estimate_lipschitz_matrix(const std::function<Mat(const Vec&)>& fn,
                                 const Box& region, int n_samples, std::uint64_t seed,
                                 double inflation) {
  return estimate_impl(
      [&fn](const Vec& x, const Vec& y) {
        const Mat d = fn(x) - fn(y);
        return d.jacobiSvd().singularValues()[0];
      },
      region, n_samples, seed, inflation);
}

}  // namespace ncsafe
