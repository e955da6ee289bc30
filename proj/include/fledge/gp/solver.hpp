#pragma once

#include <limits>
#include <string>
#include <vector>

#include "fledge/gp/convex_form.hpp"
#include "fledge/gp/expr.hpp"

namespace fledge::gp {

struct SolverOptions {
  double kkt_tol = 1e-8;   // surrogate gap + stationarity threshold (log space)
  double feas_tol = 1e-9;  // tolerance for constraint satisfaction checks
  int max_outer = 60;      // barrier parameter updates
  int max_inner = 200;     // Newton steps per centering
  double barrier_mult = 30.0;
  // Optional warm start; must be strictly feasible to be used.
  Point initial_point;
};

enum class SolveStatus { Optimal, Infeasible, MaxIterations };

const char* to_string(SolveStatus s);

struct GpSolution {
  Point point;
  double objective_value = std::numeric_limits<double>::quiet_NaN();
  SolveStatus status = SolveStatus::MaxIterations;
  double kkt_residual = std::numeric_limits<double>::infinity();
  // Objective value after each outer (centering) iteration; non-increasing
  // along the central path.
  std::vector<double> outer_objectives;
  // Lagrange multipliers of the log-space inequality constraints, ordered as
  // gp.ineq_constraints followed by one row per variable upper bound.
  std::vector<double> ineq_duals;
  std::vector<std::string> ineq_dual_names;
};

// Damped-Newton logarithmic-barrier method on the convex form, with a
// phase-I auxiliary program (min t s.t. g_i <= t) for initialization.
// Deterministic: identical inputs produce bit-identical solutions.
GpSolution solve_gp(const GeoProgram& gp, const SolverOptions& opts = {});

}  // namespace fledge::gp
