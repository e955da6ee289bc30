#pragma once

#include <vector>

#include "fledge/cost/system.hpp"
#include "fledge/sim/problem.hpp"
#include "fledge/sim/quantizer.hpp"

// Executable federated training loop: per global round, every worker runs
// K_n mini-batch SGD steps from the recovered global model, uploads a
// quantized model delta, and the server broadcasts the quantized average.
// Both sides recover the global model by accumulating the same broadcasts.

namespace fledge::sim {

enum class RecordLevel {
  Costs,         // bits only
  Loss,          // + training loss per round
  SyncAverages,  // + synchronized local averages for the convergence metric
};

struct SimOptions {
  std::uint64_t seed = 1;
  RecordLevel record = RecordLevel::Loss;
  const Quantizer* quantizer = &builtin_quantizer();
};

struct Trajectory {
  int rounds = 0;
  std::vector<double> step_sizes;       // gamma per round
  std::vector<double> losses;           // f at the recovered model, per round
  std::vector<double> uplink_bits;      // per round, summed over workers
  std::vector<double> downlink_bits;    // per round
  double initial_broadcast_bits = 0.0;
  Eigen::VectorXd final_model;
  Eigen::VectorXd server_recovered;     // server-side accumulated global model

  // RecordLevel::SyncAverages only.
  // sync_averages[k0][k] is the average of the (virtually padded) local
  // models after k synchronized local steps, k = 0..maxK-1.
  std::vector<std::vector<Eigen::VectorXd>> sync_averages;
  std::vector<int> true_update_counts;  // N_k for k = 1..maxK
  std::vector<std::vector<Eigen::VectorXd>> worker_finals;     // [k0][n]
  std::vector<Eigen::VectorXd> worker_recovered;               // per-worker x-hat at the end
};

// Parameters must be integral (iterations and batch); step sizes in (0, 1/L]
// are the caller's contract, gamma = 0 is tolerated for diagnostics.
Trajectory run_genqsgd(const MlProblem& problem, const cost::AlgorithmParams& params,
                       const cost::SystemProfile& sys, const SimOptions& opts);

}  // namespace fledge::sim
