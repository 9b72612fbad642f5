#include <doctest.h>

#include "ncsafe/dynamics.hpp"
#include "ncsafe/rng.hpp"
#include "test_helpers.hpp"

using namespace ncsafe;
using namespace ncsafe::testing;

TEST_CASE("step: 1-D integrator identities") {
  const SystemModel m = integrator_1d();
  CHECK(step(m, vec1(2.0), vec1(3.0), vec1(0.0))[0] == doctest::Approx(5.0));
  CHECK(step(m, vec1(2.0), vec1(0.0), vec1(-1.0))[0] == doctest::Approx(1.0));
}

TEST_CASE("step: double integrator hand-evaluated Euler map") {
  const SystemModel m = double_integrator(0.005);
  Vec x(2);
  x << 0.0, 1.0;
  const Vec next = step(m, x, vec1(1.0), Vec::Zero(2));
  CHECK(next[0] == doctest::Approx(0.005).epsilon(1e-12));
  CHECK(next[1] == doctest::Approx(1.005).epsilon(1e-12));
}

TEST_CASE("step: dimension mismatches are hard errors") {
  const SystemModel m = integrator_1d();
  CHECK_THROWS_AS(step(m, Vec::Zero(2), vec1(0.0), vec1(0.0)), std::invalid_argument);
  CHECK_THROWS_AS(step(m, vec1(0.0), Vec::Zero(2), vec1(0.0)), std::invalid_argument);
  CHECK_THROWS_AS(step(m, vec1(0.0), vec1(0.0), Vec::Zero(2)), std::invalid_argument);
}

TEST_CASE("step: linear in the disturbance") {
  const SystemModel m = double_integrator(0.01);
  Vec x(2);
  x << 0.3, -0.7;
  Vec w1(2), w2(2);
  w1 << 0.1, -0.2;
  w2 << -0.4, 0.05;
  const Vec d = step(m, x, vec1(0.5), w1) - step(m, x, vec1(0.5), w2);
  CHECK((d - (w1 - w2)).norm() == 0.0);
}

TEST_CASE("rollout: trivial cases") {
  const SystemModel m = integrator_1d();
  CHECK(rollout(m, vec1(0.0), {}).empty());

  const std::vector<Vec> inputs{vec1(1.0), vec1(1.0), vec1(1.0)};
  const auto states = rollout(m, vec1(0.0), inputs);
  REQUIRE(states.size() == 3);
  CHECK(states[0][0] == doctest::Approx(1.0));
  CHECK(states[1][0] == doctest::Approx(2.0));
  CHECK(states[2][0] == doctest::Approx(3.0));
}

TEST_CASE("rollout agrees exactly with repeated step at w = 0") {
  // Random 3-D linear system, 20 steps.
  SplitMix64 rng(42);
  Mat A(3, 3), B(3, 2);
  for (int i = 0; i < 9; ++i) A.data()[i] = 0.3 * rng.next_normal();
  for (int i = 0; i < 6; ++i) B.data()[i] = rng.next_normal();
  SystemModel m;
  m.state_dim = 3;
  m.input_dim = 2;
  m.f = [A](const Vec& x) -> Vec { return A * x; };
  m.g = [B](const Vec&) -> Mat { return B; };

  Vec x0(3);
  x0 << 1.0, -0.5, 0.25;
  std::vector<Vec> inputs;
  for (int k = 0; k < 20; ++k) {
    Vec u(2);
    u << rng.next_normal(), rng.next_normal();
    inputs.push_back(u);
  }
  const auto states = rollout(m, x0, inputs);
  Vec x = x0;
  const Vec w0 = Vec::Zero(3);
  for (int k = 0; k < 20; ++k) {
    x = step(m, x, inputs[k], w0);
    CHECK((x - states[k]).norm() == 0.0);
  }
}

TEST_CASE("predict: no delay and summation cases") {
  const SystemModel m = integrator_1d();
  InputBuffer empty(0);
  CHECK(predict(m, vec1(7.0), empty)[0] == doctest::Approx(7.0));

  InputBuffer buf(2);
  buf.push(vec1(1.0));
  buf.push(vec1(2.0));
  CHECK(predict(m, vec1(0.0), buf)[0] == doctest::Approx(3.0));
}

TEST_CASE("predict: under-filled buffer with positive delay is an error") {
  const SystemModel m = integrator_1d();
  InputBuffer buf(3);
  buf.push(vec1(1.0));
  CHECK_THROWS_AS(predict(m, vec1(0.0), buf), std::invalid_argument);
}

TEST_CASE("predict reconstructs the disturbance-free trajectory") {
  const SystemModel m = double_integrator(0.005);
  SplitMix64 rng(7);
  Vec x(2);
  x << 0.1, 0.0;
  InputBuffer buf(20);
  const Vec x_delayed = x;
  for (int k = 0; k < 20; ++k) {
    const Vec u = vec1(0.5 * rng.next_normal());
    buf.push(u);
    x = step(m, x, u, Vec::Zero(2));
  }
  const Vec x_hat = predict(m, x_delayed, buf);
  CHECK((x - x_hat).norm() <= 1e-9 * std::max(1.0, x.norm()));
}

TEST_CASE("determinism: identical inputs give bit-identical outputs") {
  const SystemModel m = double_integrator(0.005);
  Vec x(2);
  x << 0.25, -1.5;
  const Vec a = step(m, x, vec1(0.7), Vec::Zero(2));
  const Vec b = step(m, x, vec1(0.7), Vec::Zero(2));
  CHECK((a - b).norm() == 0.0);
}

TEST_CASE("InputBound: ball and box basics") {
  const InputBound ball = InputBound::ball(2.0);
  CHECK(ball.contains(vec1(1.5)));
  CHECK_FALSE(ball.contains(vec1(2.5)));
  CHECK(ball.project(vec1(4.0))[0] == doctest::Approx(2.0));
  CHECK(ball.max_norm() == doctest::Approx(2.0));
  CHECK(ball.tightened(0.5).radius == doctest::Approx(1.5));
  CHECK_THROWS_AS(ball.tightened(2.5), std::invalid_argument);

  Vec lo(2), hi(2);
  lo << -1.0, -2.0;
  hi << 1.0, 2.0;
  const InputBound box = InputBound::box(lo, hi);
  Vec u(2);
  u << 3.0, 0.5;
  CHECK_FALSE(box.contains(u));
  const Vec proj = box.project(u);
  CHECK(proj[0] == doctest::Approx(1.0));
  CHECK(proj[1] == doctest::Approx(0.5));
  CHECK(box.max_norm() == doctest::Approx(std::sqrt(5.0)));
}
