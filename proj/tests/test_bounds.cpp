#include <doctest.h>

#include "ncsafe/bounds.hpp"
#include "ncsafe/dynamics.hpp"
#include "ncsafe/rng.hpp"
#include "test_helpers.hpp"

using namespace ncsafe;
using namespace ncsafe::testing;

namespace {

ToleranceInputs make_inputs(double eta, double gamma, double lh, double lf, double lg,
                            double umax, int tau, int N) {
  ToleranceInputs t;
  t.h_value = eta;
  t.gamma = gamma;
  t.lipschitz_h = lh;
  t.lipschitz_f = lf;
  t.lipschitz_g = lg;
  t.input_norm_max = umax;
  t.tau = tau;
  t.horizon = N;
  return t;
}

}  // namespace

TEST_CASE("local_tolerance: direct formula and boundary cases") {
  CHECK(local_tolerance(make_inputs(1.0, 0.5, 2.0, 1, 0, 1, 0, 1)) == doctest::Approx(0.25));
  // On the boundary itself no disturbance can be tolerated.
  CHECK(local_tolerance(make_inputs(0.0, 0.5, 2.0, 1, 0, 1, 0, 1)) == 0.0);
  CHECK(local_tolerance(make_inputs(3.0, 1.0, 2.0, 1, 0, 1, 0, 1)) == 0.0);
}

TEST_CASE("gain_G: hand-evaluated sums") {
  CHECK(gain_G(0, 1, 0.37) == doctest::Approx(1.0));
  CHECK(gain_G(0, 1, 5.0) == doctest::Approx(1.0));
  CHECK(gain_G(1, 1, 2.0) == doctest::Approx(3.0));   // 2*1 + 1
  CHECK(gain_G(0, 2, 1.0) == doctest::Approx(2.0));   // 0 + (1 + 1)
  CHECK(gain_G(2, 1, 1.0) == doctest::Approx(3.0));   // 1*(1+1) + 1
}

TEST_CASE("remote_tolerance: hand-evaluated cases") {
  // tau=2, l=1, L_d=1: G = 3, value 0.5/3.
  const auto t1 = make_inputs(1.0, 0.5, 1.0, 1.0, 0.0, 1.0, 2, 1);
  CHECK(remote_tolerance(t1, 1) == doctest::Approx(0.5 / 3.0).epsilon(1e-12));
  // tau=0, l=2, L_d=2: G = 3, value 0.25/3.
  const auto t2 = make_inputs(1.0, 0.5, 1.0, 2.0, 0.0, 1.0, 0, 2);
  CHECK(remote_tolerance(t2, 2) == doctest::Approx(0.25 / 3.0).epsilon(1e-12));
}

TEST_CASE("remote_tolerance at tau=0, l=1 equals local_tolerance exactly") {
  SplitMix64 rng(123);
  for (int i = 0; i < 200; ++i) {
    const auto t = make_inputs(10.0 * rng.next_uniform(), rng.next_uniform(),
                               0.01 + 10 * rng.next_uniform(), 3 * rng.next_uniform(),
                               3 * rng.next_uniform(), 0.01 + 5 * rng.next_uniform(), 0, 1);
    CHECK(remote_tolerance(t, 1) == local_tolerance(t));  // exact, not approximate
  }
}

TEST_CASE("remote_tolerance_horizon: N=1 and monotone decrease in l") {
  const auto t1 = make_inputs(1.0, 0.5, 1.0, 1.0, 0.1, 2.0, 3, 1);
  CHECK(remote_tolerance_horizon(t1) == remote_tolerance(t1, 1));

  // Monotone decreasing in l over a grid, so the binding bound is l = N.
  SplitMix64 rng(321);
  for (int i = 0; i < 100; ++i) {
    auto t = make_inputs(0.1 + 5 * rng.next_uniform(), 0.05 + 0.9 * rng.next_uniform(),
                         0.1 + 3 * rng.next_uniform(), 0.1 + 2 * rng.next_uniform(),
                         rng.next_uniform(), 0.1 + 3 * rng.next_uniform(),
                         static_cast<int>(rng.next_uniform(0, 5)), 6);
    double prev = remote_tolerance(t, 1);
    for (int l = 2; l <= t.horizon; ++l) {
      const double cur = remote_tolerance(t, l);
      CHECK(cur <= prev + 1e-15);
      prev = cur;
    }
    CHECK(remote_tolerance_horizon(t) == doctest::Approx(remote_tolerance(t, t.horizon)));
  }
}

TEST_CASE("remote_tolerance strictly decreasing in tau") {
  const auto base = make_inputs(1.0, 0.5, 1.0, 0.8, 0.1, 2.0, 0, 3);
  for (int l = 1; l <= 3; ++l) {
    double prev = std::numeric_limits<double>::infinity();
    for (int tau = 0; tau <= 6; ++tau) {
      auto t = base;
      t.tau = tau;
      const double cur = remote_tolerance(t, l);
      CHECK(cur < prev);
      prev = cur;
    }
  }
}

TEST_CASE("gain_G exceeds the horizon sum whenever tau > 0") {
  SplitMix64 rng(55);
  for (int i = 0; i < 200; ++i) {
    const double ld = 0.05 + 4.0 * rng.next_uniform();
    const int tau = 1 + static_cast<int>(rng.next_uniform(0, 8));
    const int l = 1 + static_cast<int>(rng.next_uniform(0, 6));
    CHECK(gain_G(tau, l, ld) > gain_G(0, l, ld));
  }
}

TEST_CASE("check_proposition: representative cases") {
  // tau = 0: clauses 1-2 meaningful, clause 3 vacuous.
  CHECK(check_proposition(make_inputs(1.0, 0.5, 1.0, 1.0, 0.2, 2.0, 0, 4)).all());
  // Delayed case.
  CHECK(check_proposition(make_inputs(2.0, 0.3, 0.7, 1.2, 0.5, 3.0, 3, 5)).all());
  // Degenerate gamma = 1: all tolerances zero, clauses hold trivially.
  CHECK(check_proposition(make_inputs(2.0, 1.0, 0.7, 1.2, 0.5, 3.0, 3, 5)).all());
}

TEST_CASE("prediction_error_bound: formula cases") {
  CHECK(prediction_error_bound(make_inputs(1, 0.5, 1, 1, 0, 1, 0, 1), 0.3) == 0.0);
  CHECK(prediction_error_bound(make_inputs(1, 0.5, 1, 1.0, 0.0, 1.0, 3, 1), 0.1) ==
        doctest::Approx(0.3));
}

TEST_CASE("prediction_error_bound holds empirically on a 1-D contraction") {
  // x+ = 0.5 x + w, predictor x_hat+ = 0.5 x_hat; e_tau <= w_bar * sum L^i.
  const double w_bar = 0.05;
  const int tau = 6;
  const auto t = make_inputs(1.0, 0.5, 1.0, 0.5, 0.0, 1.0, tau, 1);
  const double bound = prediction_error_bound(t, w_bar);
  SplitMix64 rng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    double x = rng.next_uniform(-1.0, 1.0);
    double x_hat = x;
    for (int k = 0; k < tau; ++k) {
      const double w = w_bar * rng.next_uniform(-1.0, 1.0);
      x = 0.5 * x + w;
      x_hat = 0.5 * x_hat;
    }
    CHECK(std::abs(x - x_hat) <= bound + 1e-12);
  }
}
