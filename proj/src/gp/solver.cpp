#include "fledge/gp/solver.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <cstdio>
#include <cstdlib>

namespace fledge::gp {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::MaxIterations: return "MaxIterations";
  }
  return "?";
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct BarrierProblem {
  LogSumExp objective;
  std::vector<LogSumExp> ineq;
  MatrixXd eq_coeffs;
  VectorXd eq_rhs;

  // Orthonormal basis of the equality null space; Newton runs in these
  // coordinates so iterates stay on the manifold exactly. A KKT-block solve
  // instead is unreliable here: the barrier Hessian reaches ~1e10 while the
  // equality rows are O(1), and the equality part of the step drowns in
  // round-off.
  MatrixXd null_basis;

  void finalize() {
    const int n = static_cast<int>(objective.coeffs.cols());
    if (eq_coeffs.rows() == 0) {
      null_basis = MatrixXd::Identity(n, n);
      return;
    }
    Eigen::JacobiSVD<MatrixXd> svd(eq_coeffs, Eigen::ComputeFullV);
    long rank = svd.rank();
    null_basis = svd.matrixV().rightCols(n - rank);
  }
};

// t * f0(y) - sum_i log(-f_i(y)); +inf outside the domain.
double merit(const BarrierProblem& p, double t, const VectorXd& y) {
  double v = t * p.objective.value(y);
  for (const auto& f : p.ineq) {
    double fi = f.value(y);
    if (fi >= 0.0) return std::numeric_limits<double>::infinity();
    v -= std::log(-fi);
  }
  return v;
}

struct CenterResult {
  VectorXd y;
  bool converged = false;
};

// Damped Newton on the equality manifold for fixed barrier parameter t.
CenterResult center(const BarrierProblem& p, double t, VectorXd y, int max_inner) {
  const int n = static_cast<int>(y.size());
  const MatrixXd& Z = p.null_basis;
  const int nz = static_cast<int>(Z.cols());
  CenterResult res;
  if (nz == 0) {  // manifold is a single point
    res.y = std::move(y);
    res.converged = true;
    return res;
  }

  double val;
  VectorXd grad(n), gi(n);
  MatrixXd hess(n, n), hi(n, n);
  double prev_decrement = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < max_inner; ++iter) {
    p.objective.value_grad_hess(y, val, grad, hess);
    VectorXd g = t * grad;
    MatrixXd H = t * hess;
    for (const auto& f : p.ineq) {
      double fi;
      f.value_grad_hess(y, fi, gi, hi);
      double inv = 1.0 / (-fi);
      g += inv * gi;
      H += (inv * inv) * gi * gi.transpose() + inv * hi;
    }

    VectorXd gz = Z.transpose() * g;
    MatrixXd Hz = Z.transpose() * H * Z;
    double reg = 1e-12 * (1.0 + Hz.diagonal().cwiseAbs().maxCoeff());
    Hz.diagonal().array() += reg;
    VectorXd dw = Hz.fullPivLu().solve(-gz);
    if (!dw.allFinite()) break;
    VectorXd dy = Z * dw;

    double decrement = -gz.dot(dw);
    double scale = 1.0 + std::abs(t * val);
    if (decrement * 0.5 <= 1e-14 * scale) {
      res.converged = true;
      break;
    }
    // Stagnation at the round-off floor counts as centered.
    if (decrement >= prev_decrement && decrement * 0.5 <= 1e-7 * scale) {
      res.converged = true;
      break;
    }
    prev_decrement = decrement;

    // Backtracking that keeps the best sampled point along the ray. Plain
    // first-accept Armijo can limit-cycle here: near the boundary a full
    // Newton step overshoots, bounces far into the interior, and walks back.
    double base = merit(p, t, y);
    double alpha = 1.0;
    double best_alpha = 0.0, best_merit = base;
    for (int ls = 0; ls < 70; ++ls) {
      double cand = merit(p, t, y + alpha * dy);
      if (cand < best_merit) {
        best_merit = cand;
        best_alpha = alpha;
      }
      if (best_merit <= base - 0.25 * alpha * decrement && best_alpha >= alpha) break;
      alpha *= 0.5;
    }
    if (best_alpha == 0.0) {
      res.converged = decrement * 0.5 <= 1e-6 * scale;
      break;
    }
    y += best_alpha * dy;
  }
  res.y = y;
  return res;
}

struct BarrierRun {
  VectorXd y;
  double t = 1.0;
  // Surrogate duality gap m/t: the certificate f0(y) - p* <= gap that a
  // centered point carries.
  double gap = std::numeric_limits<double>::infinity();
  bool converged = false;
  std::vector<double> outer_values;  // f0 after each centering
};

// Path-following loop. `stop_early(f0, y)` may truncate (used by phase I).
template <typename EarlyStop>
BarrierRun barrier_minimize(const BarrierProblem& p, VectorXd y0, const SolverOptions& opts,
                            EarlyStop stop_early) {
  BarrierRun run;
  run.y = std::move(y0);
  const double m = static_cast<double>(p.ineq.size());

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    CenterResult c = center(p, run.t, run.y, opts.max_inner);
    if (!c.y.allFinite()) break;
    run.y = c.y;
    double f0 = p.objective.value(run.y);
    run.outer_values.push_back(f0);
    run.gap = m / run.t;

    if (stop_early(f0, run.y)) {
      run.converged = true;
      break;
    }
    if (m == 0.0) {  // no inequalities: one centering is the whole solve
      run.converged = c.converged;
      run.gap = 0.0;
      break;
    }
    if (run.gap <= opts.kkt_tol) {
      // Gap certificate reached: stop growing t. One extra centering pass may
      // rescue a struggling inner loop; otherwise report honestly.
      if (!c.converged) {
        CenterResult retry = center(p, run.t, run.y, opts.max_inner);
        if (retry.y.allFinite()) {
          run.y = retry.y;
          run.outer_values.push_back(p.objective.value(run.y));
        }
        c.converged = retry.converged;
      }
      run.converged = c.converged;
      break;
    }
    run.t *= opts.barrier_mult;
  }
  return run;
}

VectorXd project_onto_equalities(const MatrixXd& A, const VectorXd& b, VectorXd y) {
  if (A.rows() == 0) return y;
  VectorXd r = b - A * y;
  y += A.completeOrthogonalDecomposition().solve(r).eval();
  return y;
}

double max_ineq_value(const std::vector<LogSumExp>& ineq, const VectorXd& y) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& f : ineq) worst = std::max(worst, f.value(y));
  return worst;
}

}  // namespace

GpSolution solve_gp(const GeoProgram& gp, const SolverOptions& opts) {
  ConvexForm cf = to_convex_form(gp);
  const int n = cf.num_vars();

  BarrierProblem prob{cf.objective, cf.ineq, cf.eq_coeffs, cf.eq_rhs, {}};
  prob.finalize();

  VectorXd y0 = VectorXd::Zero(n);
  if (!opts.initial_point.empty()) {
    y0 = cf.from_point(opts.initial_point);
  }
  y0 = project_onto_equalities(prob.eq_coeffs, prob.eq_rhs, y0);

  GpSolution out;

  // Phase I: min tau s.t. f_i(y) <= tau, skipped when the start is already
  // strictly interior. Infeasible iff exp(tau*) > 1 + 1e-7.
  if (max_ineq_value(prob.ineq, y0) > -1e-9 && !prob.ineq.empty()) {
    BarrierProblem aux;
    aux.objective.consts = VectorXd::Zero(1);
    aux.objective.coeffs = MatrixXd::Zero(1, n + 1);
    aux.objective.coeffs(0, n) = 1.0;
    for (const auto& f : prob.ineq) {
      LogSumExp g = f;
      g.coeffs.conservativeResize(Eigen::NoChange, n + 1);
      g.coeffs.col(n).setConstant(-1.0);
      aux.ineq.push_back(std::move(g));
    }
    aux.eq_coeffs = MatrixXd::Zero(prob.eq_coeffs.rows(), n + 1);
    aux.eq_coeffs.leftCols(n) = prob.eq_coeffs;
    aux.eq_rhs = prob.eq_rhs;
    aux.finalize();

    VectorXd z0(n + 1);
    z0.head(n) = y0;
    z0[n] = max_ineq_value(prob.ineq, y0) + 1.0;

    SolverOptions aux_opts = opts;
    aux_opts.kkt_tol = 1e-9;
    BarrierRun aux_run = barrier_minimize(
        aux, z0, aux_opts, [&](double /*f0*/, const VectorXd& z) {
          return max_ineq_value(prob.ineq, z.head(n)) < -1e-6;  // clearly interior
        });

    y0 = aux_run.y.head(n);
    // The point itself decides feasibility: when the early exit fires the
    // iterate is strictly interior while the tau coordinate still lags. An
    // infeasible program leaves max_i f_i at log(t*) > log(1 + 1e-7) > 0.
    if (max_ineq_value(prob.ineq, y0) >= -1e-13) {
      out.status = SolveStatus::Infeasible;
      out.point = cf.to_point(y0);
      return out;
    }
  }

  BarrierRun run = barrier_minimize(prob, y0, opts,
                                    [](double, const VectorXd&) { return false; });

  out.point = cf.to_point(run.y);
  out.objective_value = gp.objective.eval(out.point);
  double eq_res = 0.0;
  if (prob.eq_coeffs.rows() > 0) {
    eq_res = (prob.eq_coeffs * run.y - prob.eq_rhs).lpNorm<Eigen::Infinity>();
  }
  double primal_violation = std::max(0.0, prob.ineq.empty() ? 0.0
                                         : max_ineq_value(prob.ineq, run.y));
  out.kkt_residual = std::max({run.gap, eq_res, primal_violation});
  out.outer_objectives.reserve(run.outer_values.size());
  for (double v : run.outer_values) out.outer_objectives.push_back(std::exp(v));
  for (std::size_t i = 0; i < prob.ineq.size(); ++i) {
    double fi = prob.ineq[i].value(run.y);
    out.ineq_duals.push_back(1.0 / (run.t * (-fi)));
    out.ineq_dual_names.push_back(cf.ineq_names[i]);
  }
  out.status = run.converged ? SolveStatus::Optimal : SolveStatus::MaxIterations;
  return out;
}

}  // namespace fledge::gp
