#pragma once

#include "fledge/sim/genqsgd.hpp"

namespace fledge::sim {

// Weighted average of ||grad f(x-bar(k0, k-1))||^2 along the synchronized
// local path, weights gamma(k0) N_k / N, normalized by the weight sum.
// Requires a trajectory recorded at RecordLevel::SyncAverages.
double convergence_metric(const Trajectory& traj, const MlProblem& problem);

struct BoundCheck {
  double empirical = 0.0;  // trial-averaged metric
  double bound = 0.0;      // closed-form convergence error for the same params
  double ratio = 0.0;
  bool pass = false;
  int trials = 0;
};

// Averages the metric over independently seeded runs and compares against the
// convergence-error bound; passes when ratio <= 1 + slack.
BoundCheck validate_bound(const MlProblem& problem, const cost::AlgorithmParams& params,
                          const cost::SystemProfile& sys, const cost::MlConstants& ml,
                          int trials, std::uint64_t seed, double slack = 0.05);

}  // namespace fledge::sim
