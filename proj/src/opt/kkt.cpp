#include "fledge/opt/kkt.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace fledge::opt {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

}  // namespace

double kkt_residual(const EquivalentProblem& problem, const gp::Point& x,
                    const KktOptions& opts) {
  const auto* em = std::get_if<FixedExponential>(&problem.mode);
  const double log_decay = em ? std::log(em->decay) : 0.0;

  // Reduced variables: everything except X0, which is eliminated through
  // X0 = decay^K0 so the exponential links hold identically.
  std::vector<std::string> names;
  for (const auto& v : problem.variables) {
    if (v.name != "X0") names.push_back(v.name);
  }
  const int n = static_cast<int>(names.size());

  auto to_point = [&](const VectorXd& y) {
    gp::Point p;
    for (int i = 0; i < n; ++i) p[names[i]] = std::exp(y[i]);
    if (em) p["X0"] = std::exp(p["K0"] * log_decay);
    return p;
  };
  VectorXd y0(n);
  for (int i = 0; i < n; ++i) y0[i] = std::log(x.at(names[i]));

  // Log-space evaluators: objective, inequality constraints (<= 0), and
  // two-sided equalities (= 0).
  std::vector<std::function<double(const VectorXd&)>> ineq;
  std::vector<std::function<double(const VectorXd&)>> eqs;
  auto objective = [&](const VectorXd& y) { return std::log(problem.energy.eval(to_point(y))); };
  for (std::size_t i = 0; i < problem.plain_ineq.size(); ++i) {
    const auto& g = problem.plain_ineq[i];
    ineq.emplace_back([&problem, &g, &to_point](const VectorXd& y) {
      return std::log(g.eval(to_point(y)));
    });
  }
  for (const auto& sc : problem.special) {
    if (em && (sc.name == "x0_lower_link" || sc.name == "x0_upper_link")) continue;
    ineq.emplace_back(
        [&sc, &to_point](const VectorXd& y) { return std::log(sc.original(to_point(y))); });
  }
  for (const auto& v : problem.variables) {
    if (v.name == "X0" || !v.upper_bound) continue;
    double ub = *v.upper_bound;
    std::string name = v.name;
    ineq.emplace_back([name, ub, &to_point](const VectorXd& y) {
      return std::log(to_point(y).at(name) / ub);
    });
  }
  for (const auto& m : problem.equalities) {
    eqs.emplace_back(
        [&m, &to_point](const VectorXd& y) { return std::log(m.eval(to_point(y))); });
  }

  auto gradient = [&](const std::function<double(const VectorXd&)>& f) {
    VectorXd g(n);
    VectorXd y = y0;
    for (int i = 0; i < n; ++i) {
      double h = opts.fd_step;
      y[i] = y0[i] + h;
      double up = f(y);
      y[i] = y0[i] - h;
      double dn = f(y);
      y[i] = y0[i];
      g[i] = (up - dn) / (2.0 * h);
    }
    return g;
  };

  VectorXd g0 = gradient(objective);

  std::vector<VectorXd> rows;
  std::vector<double> slacks;  // -phi_i at the active constraints
  double primal_violation = 0.0;
  for (const auto& f : ineq) {
    double v = f(y0);
    primal_violation = std::max(primal_violation, v);
    if (v >= -opts.active_tol) {
      rows.push_back(gradient(f));
      slacks.push_back(-v);
    }
  }
  std::vector<VectorXd> eq_rows;
  for (const auto& f : eqs) {
    double v = f(y0);
    primal_violation = std::max(primal_violation, std::abs(v));
    eq_rows.push_back(gradient(f));
  }

  // Fit multipliers: lambda >= 0 on active inequalities, free on equalities,
  // minimizing ||g0 + J^T lambda||; projected cyclic coordinate descent.
  const int mi = static_cast<int>(rows.size());
  const int me = static_cast<int>(eq_rows.size());
  VectorXd lambda = VectorXd::Zero(mi + me);
  VectorXd residual = g0;
  for (int sweep = 0; sweep < 2000; ++sweep) {
    double moved = 0.0;
    for (int i = 0; i < mi + me; ++i) {
      const VectorXd& row = i < mi ? rows[i] : eq_rows[i - mi];
      double denom = row.squaredNorm();
      if (denom <= 0.0) continue;
      double step = row.dot(residual) / denom;
      double next = lambda[i] - step;
      if (i < mi) next = std::max(0.0, next);
      double delta = next - lambda[i];
      if (delta != 0.0) {
        residual += delta * row;
        lambda[i] = next;
        moved = std::max(moved, std::abs(delta));
      }
    }
    if (moved <= 1e-14) break;
  }

  double stationarity = residual.lpNorm<Eigen::Infinity>() /
                        std::max(1.0, g0.lpNorm<Eigen::Infinity>());
  double comp_slack = 0.0;
  for (int i = 0; i < mi; ++i) comp_slack = std::max(comp_slack, lambda[i] * slacks[i]);
  return std::max({stationarity, comp_slack, primal_violation});
}

}  // namespace fledge::opt
