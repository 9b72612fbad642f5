#pragma once

#include <memory>

#include "ncsafe/barrier.hpp"
#include "ncsafe/dynamics.hpp"
#include "ncsafe/rng.hpp"

namespace ncsafe::testing {

// 1-D integrator x+ = x + u + w.
inline SystemModel integrator_1d(double u_max = 5.0) {
  SystemModel m;
  m.state_dim = 1;
  m.input_dim = 1;
  m.f = [](const Vec& x) { return x; };
  m.g = [](const Vec&) { return Mat::Ones(1, 1); };
  m.lipschitz_f = 1.0;
  m.lipschitz_g = 0.0;
  m.input_norm_max = u_max;
  return m;
}

// Explicit-Euler double integrator (pos, vel).
inline SystemModel double_integrator(double ts) {
  SystemModel m;
  m.state_dim = 2;
  m.input_dim = 1;
  m.f = [ts](const Vec& x) {
    Vec out(2);
    out[0] = x[0] + ts * x[1];
    out[1] = x[1];
    return out;
  };
  m.g = [ts](const Vec&) {
    Mat g(2, 1);
    g(0, 0) = 0.0;
    g(1, 0) = ts;
    return g;
  };
  m.lipschitz_f = 1.0 + ts;
  m.lipschitz_g = 0.0;
  m.input_norm_max = 5.0;
  return m;
}

// Safe set {x >= 0} for scalar states.
inline std::shared_ptr<BarrierSet> halfline_barrier(double gamma) {
  std::vector<BarrierFunction> members;
  BarrierFunction b;
  b.h = [](const Vec& x) { return x[0]; };
  b.lipschitz = 1.0;
  b.label = "x>=0";
  members.push_back(b);
  return std::make_shared<BarrierSet>(std::move(members), gamma);
}

inline Vec vec1(double v) {
  Vec x(1);
  x[0] = v;
  return x;
}

}  // namespace ncsafe::testing
