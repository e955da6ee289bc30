#include "fledge/sim/metric.hpp"

#include <stdexcept>

#include "fledge/cost/convergence.hpp"

namespace fledge::sim {

double convergence_metric(const Trajectory& traj, const MlProblem& problem) {
  if (traj.sync_averages.empty() || traj.true_update_counts.empty()) {
    throw std::invalid_argument(
        "convergence_metric: trajectory lacks synchronized averages "
        "(record at RecordLevel::SyncAverages)");
  }
  const double workers = static_cast<double>(problem.num_workers());
  const int max_k = static_cast<int>(traj.true_update_counts.size());

  double weight_per_round = 0.0;  // sum_k N_k / N, same every round
  for (int k = 0; k < max_k; ++k) weight_per_round += traj.true_update_counts[k] / workers;

  Eigen::VectorXd grad(problem.dimension());
  double numerator = 0.0, denominator = 0.0;
  for (int k0 = 0; k0 < traj.rounds; ++k0) {
    double gamma = traj.step_sizes[k0];
    for (int k = 1; k <= max_k; ++k) {
      problem.full_gradient(traj.sync_averages[k0][k - 1], grad);
      numerator += gamma * (traj.true_update_counts[k - 1] / workers) * grad.squaredNorm();
    }
    denominator += gamma * weight_per_round;
  }
  return numerator / denominator;
}

BoundCheck validate_bound(const MlProblem& problem, const cost::AlgorithmParams& params,
                          const cost::SystemProfile& sys, const cost::MlConstants& ml,
                          int trials, std::uint64_t seed, double slack) {
  BoundCheck out;
  out.trials = trials;
  double total = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    SimOptions opts;
    opts.seed = seed + static_cast<std::uint64_t>(trial);
    opts.record = RecordLevel::SyncAverages;
    Trajectory traj = run_genqsgd(problem, params, sys, opts);
    total += convergence_metric(traj, problem);
  }
  out.empirical = total / trials;
  auto gammas = cost::step_sequence(params.rule, static_cast<int>(params.k0()));
  out.bound = cost::conv_error_general(gammas, params.iterations, params.batch, sys, ml);
  out.ratio = out.empirical / out.bound;
  out.pass = out.ratio <= 1.0 + slack;
  return out;
}

}  // namespace fledge::sim
