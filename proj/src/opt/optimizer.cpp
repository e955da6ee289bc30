#include "fledge/opt/optimizer.hpp"

#include <cmath>

#include "fledge/opt/kkt.hpp"
#include "fledge/opt/rounding.hpp"

namespace fledge::opt {

const char* to_string(OptStatus s) {
  switch (s) {
    case OptStatus::Converged: return "Converged";
    case OptStatus::MaxIterations: return "MaxIterations";
    case OptStatus::Infeasible: return "Infeasible";
    case OptStatus::RoundingFailed: return "RoundingFailed";
  }
  return "?";
}

namespace {

std::string kvar(int n) { return "K" + std::to_string(n); }

gp::Point heuristic_start(const EquivalentProblem& problem) {
  gp::Point x;
  x["K0"] = 1.0;
  for (int n = 1; n <= problem.num_workers; ++n) x[kvar(n)] = 1.0;
  x["B"] = 1.0;
  x["T1"] = 1.0;
  x["T2"] = 1.0;
  if (problem.baseline == Baseline::FedAvg) x["l"] = 1.0;
  if (std::holds_alternative<FixedExponential>(problem.mode)) x["X0"] = 0.5;
  const auto& conv = problem.special.front();

  if (std::holds_alternative<FullOptimization>(problem.mode)) {
    // Pick the constant step that minimizes the convergence constraint at the
    // all-ones point; 64-point log grid over (1e-12, 1/L].
    double best_g = 1e-12, best_v = std::numeric_limits<double>::infinity();
    double hi = 1.0 / problem.ml.smooth_L;
    for (int i = 0; i < 64; ++i) {
      double g = hi * std::exp(-0.35 * i);
      gp::Point probe = x;
      probe["gamma"] = g;
      double v = conv.original(problem.tighten(probe));
      if (v < best_v) {
        best_v = v;
        best_g = g;
      }
    }
    x["gamma"] = best_g;
  }

  // Doubling sweep on K0: the smallest grid value clearing the convergence
  // limit with margin, else the argmin. Starting K0 near its workable range
  // matters most in the exponential regime, where the X0 = decay^K0 link
  // only admits gradual K0 growth across tangent iterations.
  double best_k0 = 1.0, best_v = std::numeric_limits<double>::infinity();
  bool cleared = false;
  for (double k0 = 1.0; k0 <= 1.1e12; k0 *= 2.0) {
    gp::Point probe = x;
    probe["K0"] = k0;
    double v = conv.original(problem.tighten(probe));
    if (v <= 0.98) {
      best_k0 = k0;
      cleared = true;
      break;
    }
    if (v < best_v) {
      best_v = v;
      best_k0 = k0;
    }
  }
  (void)cleared;
  x["K0"] = best_k0;
  return problem.tighten(std::move(x));
}

// Feasibility restoration: minimize a shared slack u over the tangent GP with
// every inequality divided by u, recondensing at each round.
std::optional<gp::Point> slack_phase(const EquivalentProblem& problem, gp::Point x,
                                     const OptimizeOptions& opts) {
  double prev_slack = std::numeric_limits<double>::infinity();
  for (int round = 0; round < 25; ++round) {
    gp::GeoProgram tangent = build_approx_gp(problem, x);
    gp::GeoProgram relaxed;
    relaxed.variables = tangent.variables;
    relaxed.variables.push_back({"slack_u", 1e-6, 1e9, std::nullopt});
    relaxed.objective = gp::Posynomial{gp::var("slack_u")};
    for (std::size_t i = 0; i < tangent.ineq_constraints.size(); ++i) {
      relaxed.ineq_constraints.push_back(tangent.ineq_constraints[i] /
                                         gp::var("slack_u"));
      relaxed.ineq_names.push_back(tangent.ineq_names[i]);
    }
    relaxed.mono_eq_constraints = tangent.mono_eq_constraints;

    double worst = 1.0;
    for (const auto& g : tangent.ineq_constraints) worst = std::max(worst, g.eval(x));
    gp::SolverOptions sopts = opts.gp;
    sopts.initial_point = x;
    sopts.initial_point["slack_u"] = 2.0 * worst;
    gp::GpSolution sol = solve_gp(relaxed, sopts);
    if (sol.status == gp::SolveStatus::Infeasible) return std::nullopt;

    double slack = sol.point.at("slack_u");
    gp::Point candidate = sol.point;
    candidate.erase("slack_u");
    candidate = problem.tighten(std::move(candidate));
    if (problem.max_violation(candidate) <= opts.feas_tol) return candidate;
    if (slack > 1.0 + 1e-7 && slack > prev_slack * (1.0 - 1e-9)) {
      return std::nullopt;  // certified stuck above feasibility
    }
    prev_slack = slack;
    x = std::move(candidate);
  }
  return std::nullopt;
}

}  // namespace

std::optional<gp::Point> find_initial_feasible(const EquivalentProblem& problem,
                                               const OptimizeOptions& opts) {
  gp::Point x = heuristic_start(problem);
  if (problem.max_violation(x) <= opts.feas_tol) return x;
  return slack_phase(problem, std::move(x), opts);
}

namespace {

OptimizerReport optimize_impl(const Mode& mode, const cost::SystemProfile& sys,
                              const cost::MlConstants& ml, const cost::Limits& limits,
                              const OptimizeOptions& opts, Baseline baseline) {
  EquivalentProblem problem = build_equivalent(mode, sys, ml, limits, baseline, opts.equivalent);

  OptimizerReport report;
  auto start = find_initial_feasible(problem, opts);
  if (!start) {
    report.status = OptStatus::Infeasible;
    return report;
  }

  gp::Point x = *start;
  report.energy_trace.push_back(problem.energy_at(x));
  report.max_iterate_violation = std::max(0.0, problem.max_violation(x));
  bool converged = false;

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    report.outer_iterations = outer + 1;
    gp::GeoProgram tangent = build_approx_gp(problem, x);
    gp::SolverOptions sopts = opts.gp;
    sopts.initial_point = x;
    gp::GpSolution sol = solve_gp(tangent, sopts);
    if (sol.status == gp::SolveStatus::Infeasible) break;

    gp::Point candidate = problem.tighten(sol.point);
    double e_prev = report.energy_trace.back();
    double e_next = problem.energy_at(candidate);
    if (e_next > e_prev * (1.0 + 1e-12)) {
      converged = true;  // descent exhausted at solver precision
      break;
    }
    x = std::move(candidate);
    report.energy_trace.push_back(e_next);
    report.max_iterate_violation =
        std::max(report.max_iterate_violation, problem.max_violation(x));
    if (std::abs(e_next - e_prev) <= opts.rel_tol * std::max(1.0, std::abs(e_prev))) {
      converged = true;
      break;
    }
  }

  report.final_point = x;
  report.final_energy = report.energy_trace.back();
  report.kkt_residual = kkt_residual(problem, x);

  RoundingOptions ropts;
  ropts.feas_tol = opts.round_feas_tol;
  ropts.k0_retry = opts.k0_retry;
  ropts.max_candidates = opts.max_candidates;
  auto rounded = round_to_integers(problem, x, ropts);
  if (!rounded) {
    report.status = OptStatus::RoundingFailed;
    return report;
  }
  report.rounded = rounded->params;
  report.rounded_energy = rounded->energy;
  report.rounded_time = rounded->time;
  report.rounded_conv_error = rounded->conv_error;
  report.status = converged ? OptStatus::Converged : OptStatus::MaxIterations;
  return report;
}

}  // namespace

OptimizerReport optimize(const Mode& mode, const cost::SystemProfile& sys,
                         const cost::MlConstants& ml, const cost::Limits& limits,
                         const OptimizeOptions& opts) {
  return optimize_impl(mode, sys, ml, limits, opts, Baseline::None);
}

OptimizerReport baseline_optimize(Baseline baseline, const Mode& mode,
                                  const cost::SystemProfile& sys, const cost::MlConstants& ml,
                                  const cost::Limits& limits, const OptimizeOptions& opts) {
  return optimize_impl(mode, sys, ml, limits, opts, baseline);
}

}  // namespace fledge::opt
