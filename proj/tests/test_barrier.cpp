#include <doctest.h>

#include <cmath>

#include "ncsafe/barrier.hpp"
#include "ncsafe/robot.hpp"
#include "ncsafe/rng.hpp"
#include "test_helpers.hpp"

using namespace ncsafe;
using namespace ncsafe::testing;

namespace {

std::shared_ptr<BarrierSet> two_member_set(double gamma) {
  std::vector<BarrierFunction> members;
  BarrierFunction a, b;
  a.h = [](const Vec& x) { return x[0]; };
  a.lipschitz = 1.0;
  a.label = "x";
  b.h = [](const Vec& x) { return 1.0 - x[0]; };
  b.lipschitz = 1.0;
  b.label = "1-x";
  members.push_back(a);
  members.push_back(b);
  return std::make_shared<BarrierSet>(std::move(members), gamma);
}

}  // namespace

TEST_CASE("evaluate: single member and min composition") {
  auto single = halfline_barrier(0.5);
  CHECK(single->evaluate(vec1(2.0)) == doctest::Approx(2.0));

  auto pair = two_member_set(0.5);
  CHECK(pair->evaluate(vec1(0.3)) == doctest::Approx(0.3));
  CHECK(pair->evaluate(vec1(0.9)) == doctest::Approx(0.1));
}

TEST_CASE("BarrierSet construction rejects bad inputs") {
  CHECK_THROWS_AS(BarrierSet({}, 0.5), std::invalid_argument);
  std::vector<BarrierFunction> members;
  BarrierFunction b;
  b.h = [](const Vec& x) { return x[0]; };
  b.lipschitz = 1.0;
  members.push_back(b);
  CHECK_THROWS_AS(BarrierSet(members, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(BarrierSet(members, 1.5), std::invalid_argument);
}

TEST_CASE("evaluate is 1-Lipschitz in the member values") {
  // Shifting one member by eps moves the min by at most eps.
  for (double eps : {1e-3, 0.05, 0.4}) {
    auto base = two_member_set(0.5);
    std::vector<BarrierFunction> shifted_members;
    BarrierFunction a, b;
    a.h = [eps](const Vec& x) { return x[0] + eps; };
    a.lipschitz = 1.0;
    b.h = [](const Vec& x) { return 1.0 - x[0]; };
    b.lipschitz = 1.0;
    shifted_members.push_back(a);
    shifted_members.push_back(b);
    BarrierSet shifted(shifted_members, 0.5);
    for (double xv : {0.1, 0.5, 0.95}) {
      CHECK(std::abs(shifted.evaluate(vec1(xv)) - base->evaluate(vec1(xv))) <=
            eps + 1e-15);
    }
  }
}

TEST_CASE("cbf_residual: decay boundary and violation cases") {
  auto g1 = halfline_barrier(1.0);
  CHECK(g1->cbf_residual(vec1(5.0), vec1(0.0)) == doctest::Approx(0.0));

  auto g05 = halfline_barrier(0.5);
  CHECK(g05->cbf_residual(vec1(2.0), vec1(1.0)) == doctest::Approx(0.0));
  CHECK(g05->cbf_residual(vec1(2.0), vec1(0.5)) == doctest::Approx(-0.5));
}

TEST_CASE("cbf_residual self-transition equals gamma*h") {
  auto set = two_member_set(0.37);
  for (double xv : {0.05, 0.4, 0.77}) {
    const double h = set->evaluate(vec1(xv));
    CHECK(set->cbf_residual(vec1(xv), vec1(xv)) == doctest::Approx(0.37 * h).epsilon(1e-12));
  }
}

TEST_CASE("estimate_lipschitz: linear scalar map") {
  Box region;
  region.lo = vec1(0.0);
  region.hi = vec1(1.0);
  const double est = estimate_lipschitz_scalar(
      [](const Vec& x) { return 3.0 * x[0]; }, region, 200, 11);
  CHECK(est >= 3.0 - 1e-9);
  CHECK(est <= 3.0 * 1.2 + 1e-9);
}

TEST_CASE("estimate_lipschitz: linear vector map vs power-iteration norm") {
  SplitMix64 rng(5);
  Mat A(3, 3);
  for (int i = 0; i < 9; ++i) A.data()[i] = rng.next_normal();

  // Independent spectral-norm oracle: power iteration on A^T A.
  Vec v = Vec::Ones(3).normalized();
  for (int it = 0; it < 400; ++it) v = (A.transpose() * (A * v)).normalized();
  const double sigma = (A * v).norm();

  Box region;
  region.lo = Vec::Constant(3, -1.0);
  region.hi = Vec::Constant(3, 1.0);
  const double est = estimate_lipschitz(
      [A](const Vec& x) -> Vec { return A * x; }, region, 3000, 12);
  CHECK(est >= 0.9 * sigma);  // sampling cannot exceed sigma, inflation covers it
  CHECK(est <= 1.2 * sigma + 1e-9);
}

TEST_CASE("estimate_lipschitz: errors and determinism") {
  Box region;
  region.lo = vec1(0.0);
  region.hi = vec1(1.0);
  auto fn = [](const Vec& x) { return x[0] * x[0]; };
  CHECK_THROWS_AS(estimate_lipschitz_scalar(fn, region, 1, 3), std::invalid_argument);

  Box point;
  point.lo = vec1(0.5);
  point.hi = vec1(0.5);
  CHECK_THROWS_AS(estimate_lipschitz_scalar(fn, point, 10, 3), std::invalid_argument);

  const double a = estimate_lipschitz_scalar(fn, region, 500, 99);
  const double b = estimate_lipschitz_scalar(fn, region, 500, 99);
  CHECK(a == b);
}

TEST_CASE("estimate_lipschitz: arm distance barrier bounded by the reach") {
  robot::Scenario sc;
  sc.obstacles = {{robot::Vector2d(0.45, 0.42), 0.10}};
  sc.waypoints = {robot::Vector2d(0.6, 0.1)};
  auto set = robot::build_barriers(sc, 0.5);

  // The end-effector member is the last one (farthest point, one obstacle).
  const auto& member = set->members().back();
  Box region;
  region.lo = Vec::Zero(6);
  region.hi = Vec::Zero(6);
  region.lo.head(3) = Vec::Constant(3, -M_PI);
  region.hi.head(3) = Vec::Constant(3, M_PI);
  region.lo.tail(3) = Vec::Constant(3, -1.0);
  region.hi.tail(3) = Vec::Constant(3, 1.0);
  const double est = estimate_lipschitz_scalar(member.h, region, 2000, 21);
  CHECK(est <= 1.2 * sc.arm.reach() + 1e-9);
  // And the analytic member bound is a valid upper envelope for it.
  CHECK(est <= 1.2 * member.lipschitz + 1e-9);
}

TEST_CASE("robot start pose barrier equals hand-computed circle distance") {
  robot::Scenario sc;
  sc.obstacles = {{robot::Vector2d(0.45, 0.42), 0.10}};
  sc.waypoints = {robot::Vector2d(0.6, 0.1)};
  auto set = robot::build_barriers(sc, 0.5);
  const Vec x0 = sc.initial_state();

  // Hand forward kinematics for the end effector.
  const double l1 = sc.arm.link_lengths[0], l2 = sc.arm.link_lengths[1],
               l3 = sc.arm.link_lengths[2];
  const double t1 = sc.q0[0], t2 = t1 + sc.q0[1], t3 = t2 + sc.q0[2];
  const double ex = l1 * std::cos(t1) + l2 * std::cos(t2) + l3 * std::cos(t3);
  const double ey = l1 * std::sin(t1) + l2 * std::sin(t2) + l3 * std::sin(t3);
  const double expected =
      std::hypot(ex - 0.45, ey - 0.42) - (0.10 + sc.epsilon);
  CHECK(set->members().back().h(x0) == doctest::Approx(expected).epsilon(1e-12));
}
