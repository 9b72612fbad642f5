#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "ncsafe/dynamics.hpp"

namespace ncsafe {

enum class SolveStatus { Optimal, Infeasible, MaxIter };

const char* to_string(SolveStatus s);

// Dense convex QP
//   min 1/2 z'Hz + c'z   s.t.  A z >= b,  lower <= z <= upper (optional).
// H must be symmetric positive (semi)definite; a non-PSD H is a hard error.
struct QPProblem {
  Mat H;
  Vec c;
  Mat A;  // zero rows allowed; A.rows() == b.size()
  Vec b;
  Vec lower, upper;  // empty = unbounded
};

struct QPOptions {
  int max_iterations = 200;
  double feas_tol = 1e-9;
};

// Solution report. For status == Infeasible, active_set holds the
// incompatible constraint subset (certificate); row indices follow the
// order [A rows..., lower bounds..., upper bounds...].
struct SolveReport {
  Vec solution;
  double objective = 0.0;
  SolveStatus status = SolveStatus::MaxIter;
  std::vector<int> active_set;
  int iterations = 0;
  Vec multipliers;          // per expanded row, zero when inactive
  double kkt_residual = 0.0;
  double max_violation = 0.0;
};

SolveReport solve_qp(const QPProblem& p, const QPOptions& opts = {});

// Central-difference derivative harness (exact for quadratics up to
// roundoff). Returns the Jacobian with one row per output component.
Mat fd_jacobian(const std::function<Vec(const Vec&)>& fn, const Vec& z,
                double h_step = 1e-6);
Vec fd_gradient(const std::function<double(const Vec&)>& fn, const Vec& z,
                double h_step = 1e-6);

// Smooth NLP with inequality constraints,
//   min F(z)   s.t.  ineq(z) >= 0 elementwise,  lower <= z <= upper.
// When `residuals` is given, F(z) = ||residuals(z)||^2 and the SQP uses a
// Gauss-Newton Hessian model; otherwise F = objective with a damped BFGS
// model. Dynamics enter through the callables (single shooting): decision
// variables are the stacked inputs, states are eliminated by rollout
// inside objective/constraints.
struct NLPProblem {
  std::function<double(const Vec&)> objective;
  std::function<Vec(const Vec&)> residuals;  // optional
  std::function<Vec(const Vec&)> ineq;       // optional
  int ineq_dim = 0;
  Vec lower, upper;  // optional variable bounds
  // Optional fused evaluator computing residuals and constraints in one
  // pass; when set, the SQP differentiates through it so shared work (e.g.
  // a dynamics rollout) is done once per perturbation.
  std::function<void(const Vec&, Vec& residuals, Vec& ineq)> fused;
};

struct SQPOptions {
  int max_iterations = 60;
  double constraint_tol = 1e-8;
  double stationarity_tol = 1e-4;
  double step_tol = 1e-12;
  double fd_step = 1e-6;
  int max_line_search_halvings = 30;
  double initial_damping = 1e-8;
};

// l1-merit SQP with Levenberg damping; deterministic for fixed inputs.
// MaxIter reports the best feasible iterate found so far. Infeasible is
// returned when the elastic subproblem cannot drive the violation to zero.
SolveReport solve_nlp_sqp(const NLPProblem& p, const Vec& z0,
                          const SQPOptions& opts = {});

}  // namespace ncsafe
