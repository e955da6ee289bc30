#pragma once

#include "fledge/gp/solver.hpp"
#include "fledge/opt/equivalent.hpp"

namespace fledge::opt {

struct OptimizeOptions {
  double rel_tol = 1e-6;  // outer stop: relative energy change
  int max_outer = 200;
  double feas_tol = 1e-7;        // equivalent-problem feasibility
  double round_feas_tol = 1e-6;  // original-constraint slack for integer points
  int k0_retry = 64;             // extra K0 ceiling steps during rounding
  int max_candidates = 4096;     // floor/ceil combinations kept (nearest first)
  gp::SolverOptions gp;
  EquivalentOptions equivalent;  // samples_per_worker for FedAvg
};

enum class OptStatus { Converged, MaxIterations, Infeasible, RoundingFailed };

const char* to_string(OptStatus s);

struct OptimizerReport {
  OptStatus status = OptStatus::Infeasible;
  gp::Point final_point;  // relaxed iterate at termination
  double final_energy = 0.0;
  cost::AlgorithmParams rounded;  // integer parameters
  double rounded_energy = 0.0;
  double rounded_time = 0.0;
  double rounded_conv_error = 0.0;
  std::vector<double> energy_trace;  // one entry per accepted outer iterate
  double kkt_residual = 0.0;
  int outer_iterations = 0;
  // Worst equivalent-problem violation over all recorded iterates.
  double max_iterate_violation = 0.0;
};

// A feasible starting iterate (auxiliaries tight), or nullopt when the slack
// phase certifies infeasibility.
std::optional<gp::Point> find_initial_feasible(const EquivalentProblem& problem,
                                               const OptimizeOptions& opts = {});

// Successive tangent-GP descent to a KKT point, then integer rounding.
OptimizerReport optimize(const Mode& mode, const cost::SystemProfile& sys,
                         const cost::MlConstants& ml, const cost::Limits& limits,
                         const OptimizeOptions& opts = {});

// Same, with the baseline's structural equalities (PM: K_n = 1,
// FA: K_n = l I_n / B, PR: B = 1) added before optimizing the rest.
OptimizerReport baseline_optimize(Baseline baseline, const Mode& mode,
                                  const cost::SystemProfile& sys, const cost::MlConstants& ml,
                                  const cost::Limits& limits, const OptimizeOptions& opts = {});

}  // namespace fledge::opt
