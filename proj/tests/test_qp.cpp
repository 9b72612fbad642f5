#include <doctest.h>

#include <cmath>

#include "ncsafe/qp.hpp"
#include "ncsafe/rng.hpp"
#include "test_helpers.hpp"

using namespace ncsafe;
using namespace ncsafe::testing;

namespace {

// Brute-force oracle: multi-stage refined grid search over a box. Sound for
// convex objectives; refines around the incumbent until the cell size
// reaches `resolution`.
double grid_search_objective(const std::function<double(const Vec&)>& objective,
                             const std::function<bool(const Vec&)>& feasible, Vec lo,
                             Vec hi, double resolution) {
  const int n = static_cast<int>(lo.size());
  const int pts = 13;
  double best = std::numeric_limits<double>::infinity();
  Vec best_z = 0.5 * (lo + hi);
  while ((hi - lo).maxCoeff() > resolution) {
    best = std::numeric_limits<double>::infinity();
    Vec z(n);
    std::vector<int> idx(n, 0);
    while (true) {
      for (int d = 0; d < n; ++d)
        z[d] = lo[d] + (hi[d] - lo[d]) * idx[d] / double(pts - 1);
      if (feasible(z)) {
        const double v = objective(z);
        if (v < best) {
          best = v;
          best_z = z;
        }
      }
      int d = 0;
      while (d < n && ++idx[d] == pts) idx[d++] = 0;
      if (d == n) break;
    }
    const Vec span = (hi - lo) / double(pts - 1);
    lo = (best_z - 1.5 * span).cwiseMax(lo);
    hi = (best_z + 1.5 * span).cwiseMin(hi);
  }
  return best;
}

}  // namespace

TEST_CASE("solve_qp: single active constraint projection") {
  QPProblem p;
  p.H = Mat::Identity(2, 2);
  p.c = Vec(2);
  p.c << -1.0, -1.0;  // objective 1/2||z - (1,1)||^2 up to a constant
  p.A = Mat(1, 2);
  p.A << 1.0, 0.0;
  p.b = vec1(2.0);
  const SolveReport rep = solve_qp(p);
  REQUIRE(rep.status == SolveStatus::Optimal);
  CHECK(rep.solution[0] == doctest::Approx(2.0));
  CHECK(rep.solution[1] == doctest::Approx(1.0));
  Vec u0(2);
  u0 << 1.0, 1.0;
  CHECK(0.5 * (rep.solution - u0).squaredNorm() == doctest::Approx(0.5));
  CHECK(rep.kkt_residual <= 1e-6);
  CHECK(rep.max_violation <= 1e-8);
}

TEST_CASE("solve_qp: unconstrained minimum returns the reference") {
  QPProblem p;
  p.H = Mat::Identity(3, 3);
  p.c = Vec(3);
  p.c << -0.4, 1.7, 0.0;
  p.A = Mat(0, 3);
  p.b = Vec(0);
  const SolveReport rep = solve_qp(p);
  REQUIRE(rep.status == SolveStatus::Optimal);
  CHECK((rep.solution + p.c).norm() <= 1e-12);  // z = -c for H = I
}

TEST_CASE("solve_qp: infeasible constraints give a certificate") {
  QPProblem p;
  p.H = Mat::Identity(1, 1);
  p.c = vec1(0.0);
  p.A = Mat(2, 1);
  p.A << 1.0, -1.0;  // z >= 1 and -z >= 1
  p.b = Vec(2);
  p.b << 1.0, 1.0;
  const SolveReport rep = solve_qp(p);
  CHECK(rep.status == SolveStatus::Infeasible);
  CHECK(rep.active_set.size() == 2);
}

TEST_CASE("solve_qp: non-PSD H is a hard error") {
  QPProblem p;
  p.H = Mat::Identity(2, 2);
  p.H(1, 1) = -1.0;
  p.c = Vec::Zero(2);
  p.A = Mat(0, 2);
  p.b = Vec(0);
  CHECK_THROWS_AS(solve_qp(p), std::invalid_argument);

  // Asymmetric H is rejected too.
  QPProblem q = p;
  q.H = Mat::Identity(2, 2);
  q.H(0, 1) = 0.3;
  CHECK_THROWS_AS(solve_qp(q), std::invalid_argument);
}

TEST_CASE("solve_qp matches the grid oracle on random small instances") {
  SplitMix64 rng(2024);
  for (int inst = 0; inst < 50; ++inst) {
    const int n = 2 + static_cast<int>(rng.next_uniform(0, 2));  // 2 or 3 vars
    Mat R(n, n);
    for (int i = 0; i < n * n; ++i) R.data()[i] = rng.next_normal();
    QPProblem p;
    p.H = R.transpose() * R + 0.5 * Mat::Identity(n, n);
    p.c = Vec(n);
    for (int i = 0; i < n; ++i) p.c[i] = rng.next_normal();
    const int mc = 4;
    p.A = Mat(mc, n);
    p.b = Vec(mc);
    for (int i = 0; i < mc; ++i) {
      for (int j = 0; j < n; ++j) p.A(i, j) = rng.next_normal();
      p.b[i] = -std::abs(rng.next_normal());  // keeps z = 0 feasible
    }
    p.lower = Vec::Constant(n, -2.0);
    p.upper = Vec::Constant(n, 2.0);

    const SolveReport rep = solve_qp(p);
    REQUIRE(rep.status == SolveStatus::Optimal);

    const auto objective = [&p](const Vec& z) {
      return 0.5 * z.dot(p.H * z) + p.c.dot(z);
    };
    const auto feasible = [&p](const Vec& z) {
      return ((p.A * z - p.b).array() >= -1e-9).all();
    };
    const double oracle = grid_search_objective(objective, feasible, p.lower, p.upper,
                                                1e-3);
    CHECK(rep.objective <= oracle + 1e-2);
    CHECK(rep.objective >= oracle - 1e-2);
  }
}

TEST_CASE("solve_qp: argmin invariant under uniform positive scaling") {
  SplitMix64 rng(99);
  for (int inst = 0; inst < 20; ++inst) {
    Mat R(3, 3);
    for (int i = 0; i < 9; ++i) R.data()[i] = rng.next_normal();
    QPProblem p;
    p.H = R.transpose() * R + Mat::Identity(3, 3);
    p.c = Vec(3);
    p.c << rng.next_normal(), rng.next_normal(), rng.next_normal();
    p.A = Mat(2, 3);
    for (int i = 0; i < 6; ++i) p.A.data()[i] = rng.next_normal();
    p.b = Vec::Constant(2, -0.5);

    QPProblem scaled = p;
    const double alpha = 7.3;
    scaled.H *= alpha;
    scaled.c *= alpha;

    const SolveReport a = solve_qp(p);
    const SolveReport b = solve_qp(scaled);
    REQUIRE(a.status == SolveStatus::Optimal);
    REQUIRE(b.status == SolveStatus::Optimal);
    CHECK((a.solution - b.solution).norm() <= 1e-7);
    CHECK(b.objective == doctest::Approx(alpha * a.objective).epsilon(1e-6));
  }
}

TEST_CASE("fd_gradient: polynomial exactness") {
  CHECK(fd_gradient([](const Vec& z) { return z[0] * z[0]; }, vec1(3.0))[0] ==
        doctest::Approx(6.0).epsilon(1e-8));
  CHECK(std::abs(fd_gradient([](const Vec&) { return 4.2; }, vec1(1.0))[0]) <= 1e-8);

  // Central differences are exact for quadratics in several variables.
  Vec z(3);
  z << 0.3, -1.0, 2.0;
  const Vec g = fd_gradient(
      [](const Vec& v) { return v[0] * v[0] + 2.0 * v[1] * v[2] - v[2]; }, z);
  CHECK(g[0] == doctest::Approx(0.6).epsilon(1e-8));
  CHECK(g[1] == doctest::Approx(4.0).epsilon(1e-8));
  CHECK(g[2] == doctest::Approx(-3.0).epsilon(1e-8));
}

TEST_CASE("fd_jacobian: rows per output") {
  const Mat J = fd_jacobian(
      [](const Vec& z) {
        Vec out(2);
        out[0] = z[0] * z[1];
        out[1] = z[0] - z[1];
        return out;
      },
      (Vec(2) << 2.0, 5.0).finished());
  CHECK(J(0, 0) == doctest::Approx(5.0).epsilon(1e-7));
  CHECK(J(0, 1) == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(J(1, 0) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(J(1, 1) == doctest::Approx(-1.0).epsilon(1e-7));
}

TEST_CASE("solve_nlp_sqp: quadratic degenerates to one QP") {
  // min 1/2||z - (1,2)||^2, no constraints.
  Vec target(2);
  target << 1.0, 2.0;
  NLPProblem nlp;
  nlp.residuals = [target](const Vec& z) -> Vec {
    return std::sqrt(0.5) * (z - target);
  };
  const SolveReport rep = solve_nlp_sqp(nlp, Vec::Zero(2));
  REQUIRE(rep.status == SolveStatus::Optimal);

  QPProblem qp;
  qp.H = Mat::Identity(2, 2);
  qp.c = -target;
  qp.A = Mat(0, 2);
  qp.b = Vec(0);
  const SolveReport ref = solve_qp(qp);
  CHECK((rep.solution - ref.solution).norm() <= 1e-8);
}

TEST_CASE("solve_nlp_sqp: constrained projection with smooth constraint") {
  // min ||z||^2 s.t. z0 + z1 >= 1.
  NLPProblem nlp;
  nlp.residuals = [](const Vec& z) -> Vec { return z; };
  nlp.ineq = [](const Vec& z) -> Vec { return vec1(z[0] + z[1] - 1.0); };
  nlp.ineq_dim = 1;
  const SolveReport rep = solve_nlp_sqp(nlp, Vec::Zero(2));
  REQUIRE(rep.status == SolveStatus::Optimal);
  CHECK(rep.solution[0] == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(rep.solution[1] == doctest::Approx(0.5).epsilon(1e-5));
}

TEST_CASE("solve_nlp_sqp: infeasible constraint set reported") {
  NLPProblem nlp;
  nlp.residuals = [](const Vec& z) -> Vec { return z; };
  nlp.ineq = [](const Vec& z) -> Vec {
    Vec c(2);
    c[0] = z[0] - 1.0;   // z >= 1
    c[1] = -z[0] - 1.0;  // z <= -1
    return c;
  };
  nlp.ineq_dim = 2;
  const SolveReport rep = solve_nlp_sqp(nlp, vec1(0.0));
  CHECK(rep.status == SolveStatus::Infeasible);
}

TEST_CASE("solve_nlp_sqp: deterministic iterates") {
  NLPProblem nlp;
  nlp.residuals = [](const Vec& z) -> Vec {
    Vec r(2);
    r[0] = z[0] * z[0] - z[1];
    r[1] = z[1] - 1.0;
    return r;
  };
  nlp.ineq = [](const Vec& z) -> Vec { return vec1(z[0] + 0.5); };
  nlp.ineq_dim = 1;
  Vec z0(2);
  z0 << 0.3, -0.4;
  const SolveReport a = solve_nlp_sqp(nlp, z0);
  const SolveReport b = solve_nlp_sqp(nlp, z0);
  CHECK((a.solution - b.solution).norm() == 0.0);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("solve_nlp_sqp: objective-only mode (BFGS path)") {
  NLPProblem nlp;
  nlp.objective = [](const Vec& z) {
    return (z[0] - 2.0) * (z[0] - 2.0) + 0.5 * (z[1] + 1.0) * (z[1] + 1.0);
  };
  SQPOptions opts;
  opts.max_iterations = 200;
  const SolveReport rep = solve_nlp_sqp(nlp, Vec::Zero(2), opts);
  REQUIRE(rep.status == SolveStatus::Optimal);
  CHECK(rep.solution[0] == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(rep.solution[1] == doctest::Approx(-1.0).epsilon(1e-3));
}
