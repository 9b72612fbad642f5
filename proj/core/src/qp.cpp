#include "ncsafe/qp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ncsafe {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::MaxIter: return "MaxIter";
  }
  return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Expanded constraint matrix: user rows followed by lower/upper bound rows.
struct RowSet {
  Mat A;
  Vec b;
};

RowSet expand_rows(const QPProblem& p) {
  const int n = static_cast<int>(p.c.size());
  const int m = static_cast<int>(p.b.size());
  int extra = 0;
  if (p.lower.size() > 0) extra += n;
  if (p.upper.size() > 0) extra += n;
  RowSet rs;
  rs.A.resize(m + extra, n);
  rs.b.resize(m + extra);
  if (m > 0) {
    rs.A.topRows(m) = p.A;
    rs.b.head(m) = p.b;
  }
  int r = m;
  if (p.lower.size() > 0) {
    for (int i = 0; i < n; ++i, ++r) {
      rs.A.row(r).setZero();
      rs.A(r, i) = 1.0;
      rs.b[r] = p.lower[i];
    }
  }
  if (p.upper.size() > 0) {
    for (int i = 0; i < n; ++i, ++r) {
      rs.A.row(r).setZero();
      rs.A(r, i) = -1.0;
      rs.b[r] = -p.upper[i];
    }
  }
  return rs;
}

}  // namespace

SolveReport solve_qp(const QPProblem& p, const QPOptions& opts) {
  const int n = static_cast<int>(p.c.size());
  if (p.H.rows() != n || p.H.cols() != n)
    throw std::invalid_argument("solve_qp: H dimension mismatch");
  if (p.A.rows() != p.b.size())
    throw std::invalid_argument("solve_qp: A/b dimension mismatch");
  if (p.A.rows() > 0 && p.A.cols() != n)
    throw std::invalid_argument("solve_qp: A column mismatch");

  const double h_scale = std::max(1.0, p.H.cwiseAbs().maxCoeff());
  if ((p.H - p.H.transpose()).cwiseAbs().maxCoeff() > 1e-12 * h_scale)
    throw std::invalid_argument("solve_qp: H not symmetric");

  // Factor H; a PSD-but-singular H gets a tiny ridge, anything indefinite
  // is a hard error.
  Mat H = p.H;
  Eigen::LLT<Mat> llt(H);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Mat> es(p.H);
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < -1e-9 * h_scale)
      throw std::invalid_argument("solve_qp: H is not positive semidefinite");
    H.diagonal().array() += std::abs(min_eig) + 1e-10 * h_scale;
    llt.compute(H);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("solve_qp: factorization failed");
  }

  const RowSet rows = expand_rows(p);
  const int m_total = static_cast<int>(rows.b.size());

  SolveReport rep;
  Vec z = llt.solve(-p.c);
  std::vector<int> active;
  Vec lambda_active(0);
  std::vector<char> is_active(m_total, 0);

  auto kkt_step = [&](const Vec& a_p, Vec& d, Vec& y) {
    const int k = static_cast<int>(active.size());
    if (k == 0) {
      d = llt.solve(a_p);
      y.resize(0);
      return;
    }
    Mat N(k, n);
    for (int i = 0; i < k; ++i) N.row(i) = rows.A.row(active[i]);
    const Mat HiNt = llt.solve(N.transpose());
    const Vec Hia = llt.solve(a_p);
    const Mat S = N * HiNt;  // k x k Schur complement
    y = S.ldlt().solve(N * Hia);
    d = Hia - HiNt * y;
  };

  int iterations = 0;
  bool done = false;
  while (!done) {
    // Most violated inactive constraint.
    int idx = -1;
    double worst = -opts.feas_tol;
    for (int i = 0; i < m_total; ++i) {
      if (is_active[i]) continue;
      const double s = rows.A.row(i).dot(z) - rows.b[i];
      if (s < worst) {
        worst = s;
        idx = i;
      }
    }
    if (idx < 0) {
      rep.status = SolveStatus::Optimal;
      break;
    }

    const Vec a_p = rows.A.row(idx).transpose();
    double lambda_p = 0.0;
    while (true) {
      if (++iterations > opts.max_iterations) {
        rep.status = SolveStatus::MaxIter;
        done = true;
        break;
      }
      Vec d, y;
      kkt_step(a_p, d, y);
      const double dTa = a_p.dot(d);

      double t1 = kInf;
      int blocker = -1;
      for (int i = 0; i < static_cast<int>(active.size()); ++i) {
        if (y.size() > i && y[i] > 1e-12) {
          const double t = lambda_active[i] / y[i];
          if (t < t1) {
            t1 = t;
            blocker = i;
          }
        }
      }

      const double s_p = a_p.dot(z) - rows.b[idx];
      if (dTa <= 1e-12 * (1.0 + a_p.squaredNorm())) {
        // No primal progress possible along this constraint.
        if (blocker < 0) {
          rep.status = SolveStatus::Infeasible;
          rep.active_set = active;
          rep.active_set.push_back(idx);
          rep.solution = z;
          rep.objective = 0.5 * z.dot(p.H * z) + p.c.dot(z);
          rep.iterations = iterations;
          return rep;
        }
        for (int i = 0; i < static_cast<int>(active.size()); ++i)
          lambda_active[i] -= t1 * y[i];
        lambda_p += t1;
        is_active[active[blocker]] = 0;
        active.erase(active.begin() + blocker);
        Vec nl(lambda_active.size() - 1);
        int w = 0;
        for (int i = 0; i < lambda_active.size(); ++i)
          if (i != blocker) nl[w++] = lambda_active[i];
        lambda_active = nl;
        continue;
      }

      const double t2 = -s_p / dTa;
      const double t = std::min(t1, t2);
      z += t * d;
      for (int i = 0; i < static_cast<int>(active.size()); ++i)
        lambda_active[i] -= t * y[i];
      lambda_p += t;

      if (t2 <= t1) {
        active.push_back(idx);
        is_active[idx] = 1;
        Vec nl(lambda_active.size() + 1);
        nl.head(lambda_active.size()) = lambda_active;
        nl[lambda_active.size()] = lambda_p;
        lambda_active = nl;
        break;
      }
      is_active[active[blocker]] = 0;
      active.erase(active.begin() + blocker);
      Vec nl(lambda_active.size() - 1);
      int w = 0;
      for (int i = 0; i < lambda_active.size(); ++i)
        if (i != blocker) nl[w++] = lambda_active[i];
      lambda_active = nl;
    }
  }

  rep.solution = z;
  rep.objective = 0.5 * z.dot(p.H * z) + p.c.dot(z);
  rep.active_set = active;
  rep.iterations = iterations;
  rep.multipliers = Vec::Zero(m_total);
  for (int i = 0; i < static_cast<int>(active.size()); ++i)
    rep.multipliers[active[i]] = lambda_active[i];
  Vec grad = p.H * z + p.c;
  if (m_total > 0) grad -= rows.A.transpose() * rep.multipliers;
  rep.kkt_residual = grad.size() > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;
  double maxv = 0.0;
  for (int i = 0; i < m_total; ++i)
    maxv = std::max(maxv, rows.b[i] - rows.A.row(i).dot(z));
  rep.max_violation = maxv;
  return rep;
}

Mat fd_jacobian(const std::function<Vec(const Vec&)>& fn, const Vec& z, double h_step) {
  if (!(h_step > 0.0)) throw std::invalid_argument("fd_jacobian: h_step must be positive");
  Vec zp = z;
  const int n = static_cast<int>(z.size());
  Mat J;
  for (int j = 0; j < n; ++j) {
    zp[j] = z[j] + h_step;
    const Vec fp = fn(zp);
    zp[j] = z[j] - h_step;
    const Vec fm = fn(zp);
    zp[j] = z[j];
    if (J.size() == 0) J.resize(fp.size(), n);
    J.col(j) = (fp - fm) / (2.0 * h_step);
  }
  if (J.size() == 0) J.resize(fn(z).size(), 0);
  return J;
}

Vec fd_gradient(const std::function<double(const Vec&)>& fn, const Vec& z, double h_step) {
  if (!(h_step > 0.0)) throw std::invalid_argument("fd_gradient: h_step must be positive");
  Vec zp = z;
  Vec g(z.size());
  for (int j = 0; j < z.size(); ++j) {
    zp[j] = z[j] + h_step;
    const double fp = fn(zp);
    zp[j] = z[j] - h_step;
    const double fm = fn(zp);
    zp[j] = z[j];
    g[j] = (fp - fm) / (2.0 * h_step);
  }
  return g;
}

namespace {

struct NLPEval {
  double objective = 0.0;
  Vec residuals;  // empty when objective-only
  Vec ineq;
  double l1_violation = 0.0;
  double max_violation = 0.0;
};

class NLPAdapter {
 public:
  explicit NLPAdapter(const NLPProblem& p) : p_(p) {
    if (!p.objective && !p.residuals && !p.fused)
      throw std::invalid_argument("solve_nlp_sqp: objective or residuals required");
  }

  NLPEval evaluate(const Vec& z) const {
    NLPEval e;
    if (p_.fused) {
      p_.fused(z, e.residuals, e.ineq);
      e.objective = e.residuals.squaredNorm();
    } else {
      if (p_.residuals) {
        e.residuals = p_.residuals(z);
        e.objective = e.residuals.squaredNorm();
      } else {
        e.objective = p_.objective(z);
      }
      if (p_.ineq) e.ineq = p_.ineq(z);
    }
    for (int i = 0; i < e.ineq.size(); ++i) {
      const double v = std::max(0.0, -e.ineq[i]);
      e.l1_violation += v;
      e.max_violation = std::max(e.max_violation, v);
    }
    return e;
  }

  // One central-difference pass through the fused evaluator.
  void fused_jacobians(const Vec& z, double h, Mat& Jr, Mat& Jc) const {
    Vec zp = z;
    Vec rp, rm, cp, cm;
    for (int j = 0; j < z.size(); ++j) {
      zp[j] = z[j] + h;
      p_.fused(zp, rp, cp);
      zp[j] = z[j] - h;
      p_.fused(zp, rm, cm);
      zp[j] = z[j];
      if (Jr.size() == 0) Jr.resize(rp.size(), z.size());
      if (Jc.size() == 0) Jc.resize(cp.size(), z.size());
      if (rp.size() > 0) Jr.col(j) = (rp - rm) / (2.0 * h);
      if (cp.size() > 0) Jc.col(j) = (cp - cm) / (2.0 * h);
    }
  }

  bool has_residuals() const { return static_cast<bool>(p_.residuals) || static_cast<bool>(p_.fused); }
  bool has_fused() const { return static_cast<bool>(p_.fused); }
  bool has_ineq() const { return static_cast<bool>(p_.ineq) || static_cast<bool>(p_.fused); }
  const NLPProblem& problem() const { return p_; }

 private:
  const NLPProblem& p_;
};

Vec clamp_to_bounds(const NLPProblem& p, const Vec& z) {
  Vec out = z;
  if (p.lower.size() > 0) out = out.cwiseMax(p.lower);
  if (p.upper.size() > 0) out = out.cwiseMin(p.upper);
  return out;
}

}  // namespace

SolveReport solve_nlp_sqp(const NLPProblem& p, const Vec& z0, const SQPOptions& opts) {
  NLPAdapter nlp(p);
  const int n = static_cast<int>(z0.size());

  Vec z = clamp_to_bounds(p, z0);
  if (!z.allFinite()) throw std::invalid_argument("solve_nlp_sqp: non-finite start");

  NLPEval cur = nlp.evaluate(z);

  double damping = opts.initial_damping;
  double merit_weight = 1.0;

  bool have_best = false;
  Vec best_z = z;
  double best_obj = kInf;
  auto consider_best = [&](const Vec& zz, const NLPEval& e) {
    if (e.max_violation <= opts.constraint_tol && e.objective < best_obj) {
      best_obj = e.objective;
      best_z = zz;
      have_best = true;
    }
  };
  consider_best(z, cur);

  SolveReport rep;
  rep.status = SolveStatus::MaxIter;

  Mat bfgs = Mat::Identity(n, n);
  Vec prev_grad_lagrangian;
  Vec prev_z;

  int iter = 0;
  double kkt = kInf;
  while (iter < opts.max_iterations) {
    ++iter;

    // Derivatives.
    Vec grad;
    Mat B;
    Mat Jc;
    if (nlp.has_fused()) {
      Mat Jr;
      nlp.fused_jacobians(z, opts.fd_step, Jr, Jc);
      grad = 2.0 * Jr.transpose() * cur.residuals;
      B = 2.0 * Jr.transpose() * Jr;
    } else if (nlp.has_residuals()) {
      const Mat Jr = fd_jacobian(p.residuals, z, opts.fd_step);
      grad = 2.0 * Jr.transpose() * cur.residuals;
      B = 2.0 * Jr.transpose() * Jr;
      if (nlp.has_ineq()) Jc = fd_jacobian(p.ineq, z, opts.fd_step);
    } else {
      grad = fd_gradient(p.objective, z, opts.fd_step);
      B = bfgs;
      if (nlp.has_ineq()) Jc = fd_jacobian(p.ineq, z, opts.fd_step);
    }
    B.diagonal().array() += damping + 1e-10;

    // QP subproblem in the step d.
    QPProblem qp;
    qp.H = B;
    qp.c = grad;
    if (nlp.has_ineq()) {
      qp.A = Jc;
      qp.b = -cur.ineq;
    } else {
      qp.A.resize(0, n);
      qp.b.resize(0);
    }
    if (p.lower.size() > 0) qp.lower = p.lower - z;
    if (p.upper.size() > 0) qp.upper = p.upper - z;

    QPOptions qp_opts;
    qp_opts.max_iterations = 400;
    SolveReport sub = solve_qp(qp, qp_opts);

    Vec d;
    Vec lambda;
    if (sub.status == SolveStatus::Infeasible) {
      // Elastic restoration: allow per-constraint slack at a steep
      // quadratic price so the subproblem is always solvable.
      const int mc = static_cast<int>(qp.b.size());
      const double kappa = 1e6 * std::max(1.0, B.diagonal().maxCoeff());
      QPProblem el;
      el.H = Mat::Zero(n + mc, n + mc);
      el.H.topLeftCorner(n, n) = B;
      el.H.bottomRightCorner(mc, mc) = 2.0 * kappa * Mat::Identity(mc, mc);
      el.c = Vec::Zero(n + mc);
      el.c.head(n) = grad;
      el.A = Mat::Zero(mc, n + mc);
      el.A.leftCols(n) = qp.A;
      el.A.rightCols(mc) = Mat::Identity(mc, mc);
      el.b = qp.b;
      el.lower = Vec::Constant(n + mc, -kInf);
      el.upper = Vec::Constant(n + mc, kInf);
      if (p.lower.size() > 0) el.lower.head(n) = qp.lower;
      if (p.upper.size() > 0) el.upper.head(n) = qp.upper;
      el.lower.tail(mc).setZero();
      SolveReport esub = solve_qp(el, qp_opts);
      d = esub.solution.head(n);
      lambda = esub.multipliers.size() >= mc ? Vec(esub.multipliers.head(mc)) : Vec::Zero(mc);
    } else {
      d = sub.solution;
      const int mc = static_cast<int>(qp.b.size());
      lambda = sub.multipliers.size() >= mc ? Vec(sub.multipliers.head(mc)) : Vec::Zero(mc);
    }

    // NLP stationarity estimate from subproblem multipliers.
    Vec stat = grad;
    if (nlp.has_ineq() && lambda.size() > 0) stat -= Jc.transpose() * lambda;
    // Project out active variable bounds.
    for (int i = 0; i < n; ++i) {
      const bool at_lower = p.lower.size() > 0 && z[i] <= p.lower[i] + 1e-10 && stat[i] > 0.0;
      const bool at_upper = p.upper.size() > 0 && z[i] >= p.upper[i] - 1e-10 && stat[i] < 0.0;
      if (at_lower || at_upper) stat[i] = 0.0;
    }
    kkt = stat.cwiseAbs().maxCoeff();

    const double dnorm = d.size() > 0 ? d.cwiseAbs().maxCoeff() : 0.0;

    // Converged at the current point?
    if (cur.max_violation <= opts.constraint_tol &&
        (kkt <= opts.stationarity_tol || dnorm <= opts.step_tol)) {
      rep.status = SolveStatus::Optimal;
      break;
    }

    // Local infeasibility: constraints violated and no useful step left.
    if (cur.max_violation > opts.constraint_tol && dnorm <= 1e2 * opts.step_tol) {
      rep.status = SolveStatus::Infeasible;
      break;
    }

    if (lambda.size() > 0)
      merit_weight = std::max(merit_weight, 2.0 * lambda.cwiseAbs().maxCoeff() + 1.0);

    const double phi0 = cur.objective + merit_weight * cur.l1_violation;
    const double dphi = grad.dot(d) - merit_weight * cur.l1_violation;

    double t = 1.0;
    bool accepted = false;
    Vec z_try;
    NLPEval eval_try;
    for (int ls = 0; ls <= opts.max_line_search_halvings; ++ls) {
      z_try = clamp_to_bounds(p, z + t * d);
      eval_try = nlp.evaluate(z_try);
      const double phi_try = eval_try.objective + merit_weight * eval_try.l1_violation;
      if (phi_try <= phi0 + 1e-4 * t * std::min(dphi, 0.0)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }

    if (!accepted) {
      damping = std::max(damping * 10.0, 1e-6);
      if (damping > 1e10) {
        rep.status = cur.max_violation > opts.constraint_tol ? SolveStatus::Infeasible
                                                             : SolveStatus::MaxIter;
        break;
      }
      continue;
    }
    damping = std::max(opts.initial_damping, damping / 3.0);

    // Damped BFGS update for the objective-only mode.
    if (!nlp.has_residuals()) {
      Vec grad_new = fd_gradient(p.objective, z_try, opts.fd_step);
      Vec gl_new = grad_new;
      Vec gl_old = grad;
      if (nlp.has_ineq() && lambda.size() > 0) {
        const Mat Jc_new = fd_jacobian(p.ineq, z_try, opts.fd_step);
        gl_new -= Jc_new.transpose() * lambda;
        gl_old -= Jc.transpose() * lambda;
      }
      const Vec s = z_try - z;
      const Vec yv = gl_new - gl_old;
      const double sBs = s.dot(bfgs * s);
      const double sy = s.dot(yv);
      if (s.norm() > 1e-14 && sBs > 1e-14) {
        double theta = 1.0;
        if (sy < 0.2 * sBs) theta = 0.8 * sBs / (sBs - sy);
        const Vec r = theta * yv + (1.0 - theta) * (bfgs * s);
        bfgs = bfgs - (bfgs * s) * (s.transpose() * bfgs) / sBs +
               r * r.transpose() / std::max(s.dot(r), 1e-14);
      }
    }

    z = z_try;
    cur = eval_try;
    consider_best(z, cur);

    if (cur.max_violation <= opts.constraint_tol && t * dnorm <= opts.step_tol) {
      rep.status = SolveStatus::Optimal;
      break;
    }
  }

  if (rep.status != SolveStatus::Optimal && have_best) {
    // A feasible iterate exists, so the problem is not infeasible; hand the
    // best one back under a MaxIter flag.
    if (rep.status == SolveStatus::Infeasible) rep.status = SolveStatus::MaxIter;
    z = best_z;
    cur = nlp.evaluate(z);
  }

  rep.solution = z;
  rep.objective = cur.objective;
  rep.iterations = iter;
  rep.kkt_residual = kkt;
  rep.max_violation = cur.max_violation;
  return rep;
}

}  // namespace ncsafe
