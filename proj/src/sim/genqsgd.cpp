#include "fledge/sim/genqsgd.hpp"

#include <cmath>
#include <stdexcept>

namespace fledge::sim {

Trajectory run_genqsgd(const MlProblem& problem, const cost::AlgorithmParams& params,
                       const cost::SystemProfile& sys, const SimOptions& opts) {
  sys.validate();
  const int workers = sys.num_workers;
  if (problem.num_workers() != workers) {
    throw std::invalid_argument("run_genqsgd: profile and problem disagree on worker count");
  }
  if (params.iterations.size() != static_cast<std::size_t>(workers) + 1) {
    throw std::invalid_argument("run_genqsgd: iterations must have N+1 entries");
  }
  for (double k : params.iterations) {
    if (k < 1.0 || k != std::round(k)) {
      throw std::invalid_argument("run_genqsgd: iteration counts must be positive integers");
    }
  }
  if (params.batch < 1.0 || params.batch != std::round(params.batch)) {
    throw std::invalid_argument("run_genqsgd: batch size must be a positive integer");
  }

  const int dim = problem.dimension();
  const int rounds = static_cast<int>(params.k0());
  const int batch = static_cast<int>(params.batch);
  const Quantizer& q = *opts.quantizer;
  std::vector<double> gammas = cost::step_sequence(params.rule, rounds);
  for (double g : gammas) {
    if (g < 0.0) throw std::invalid_argument("run_genqsgd: negative step size");
  }

  int max_k = 0;
  for (int n = 1; n <= workers; ++n) max_k = std::max(max_k, (int)params.iterations[n]);
  const bool record_sync = opts.record == RecordLevel::SyncAverages;
  const bool record_loss = opts.record != RecordLevel::Costs;

  Trajectory traj;
  traj.rounds = rounds;
  traj.step_sizes = gammas;

  // Initialize: server draws the initial model and broadcasts its
  // quantization; every recovered model starts from zero.
  Eigen::VectorXd init = initial_model(dim, opts.seed);
  Rng init_q(derive_seed(opts.seed, StreamPurpose::kQuantize, 0, 0));
  QuantizeResult broadcast = q.quantize(init, sys.quant_level[0], init_q);
  traj.initial_broadcast_bits = sys.quant_bits(sys.quant_level[0]);

  traj.server_recovered = Eigen::VectorXd::Zero(dim);
  traj.worker_recovered.assign(workers, Eigen::VectorXd::Zero(dim));

  if (record_sync) {
    traj.true_update_counts.assign(max_k, 0);
    for (int k = 1; k <= max_k; ++k) {
      for (int n = 1; n <= workers; ++n) {
        if (k <= params.iterations[n]) ++traj.true_update_counts[k - 1];
      }
    }
  }

  Eigen::VectorXd grad(dim), delta_sum(dim);
  std::vector<int> batch_idx(batch);
  std::vector<Eigen::VectorXd> uploads(workers);

  for (int k0 = 1; k0 <= rounds; ++k0) {
    double gamma = gammas[k0 - 1];
    // Workers (and the server, in its own accumulator) recover the global
    // model from the identical broadcast vector.
    for (int n = 0; n < workers; ++n) traj.worker_recovered[n] += broadcast.value;

    std::vector<std::vector<Eigen::VectorXd>> paths;
    if (record_sync) paths.assign(workers, {});

    for (int n = 1; n <= workers; ++n) {
      Eigen::VectorXd local = traj.worker_recovered[n - 1];
      if (record_sync) paths[n - 1].push_back(local);
      Rng sampler(derive_seed(opts.seed, StreamPurpose::kSampling, n, k0));
      const int store = problem.num_samples(n - 1);
      const int local_steps = static_cast<int>(params.iterations[n]);
      for (int kn = 1; kn <= local_steps; ++kn) {
        for (int b = 0; b < batch; ++b) batch_idx[b] = sampler.uniform_int(store);
        problem.batch_grad(local, n - 1, batch_idx, grad);
        local -= gamma * grad;
        if (record_sync) paths[n - 1].push_back(local);
      }
      Rng upq(derive_seed(opts.seed, StreamPurpose::kQuantize, n, k0));
      uploads[n - 1] =
          q.quantize(local - traj.worker_recovered[n - 1], sys.quant_level[n], upq).value;
      if (record_sync) {
        if (traj.worker_finals.size() < static_cast<std::size_t>(k0)) {
          traj.worker_finals.resize(k0);
        }
        traj.worker_finals[k0 - 1].push_back(local);
      }
    }
    double up_bits = 0.0;
    for (int n = 1; n <= workers; ++n) up_bits += sys.quant_bits(sys.quant_level[n]);
    traj.uplink_bits.push_back(up_bits);

    if (record_sync) {
      std::vector<Eigen::VectorXd> averages;
      for (int k = 0; k < max_k; ++k) {
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
        for (int n = 0; n < workers; ++n) {
          int idx = std::min<int>(k, (int)paths[n].size() - 1);
          mean += paths[n][idx];
        }
        averages.push_back(mean / double(workers));
      }
      traj.sync_averages.push_back(std::move(averages));
    }

    // Server: accumulate the previous broadcast, average the quantized
    // deltas, and broadcast their quantization.
    traj.server_recovered += broadcast.value;
    delta_sum.setZero();
    for (int n = 0; n < workers; ++n) delta_sum += uploads[n];
    Eigen::VectorXd global_update = delta_sum / double(workers);
    Rng downq(derive_seed(opts.seed, StreamPurpose::kQuantize, 0, k0));
    broadcast = q.quantize(global_update, sys.quant_level[0], downq);
    traj.downlink_bits.push_back(sys.quant_bits(sys.quant_level[0]));

    if (record_loss) {
      traj.losses.push_back(problem.full_loss(traj.worker_recovered[0] + broadcast.value));
    }
  }

  // Everyone applies the final broadcast to obtain the output model.
  traj.server_recovered += broadcast.value;
  for (int n = 0; n < workers; ++n) traj.worker_recovered[n] += broadcast.value;
  traj.final_model = traj.server_recovered;
  return traj;
}

}  // namespace fledge::sim
