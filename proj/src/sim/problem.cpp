#include "fledge/sim/problem.hpp"

#include "fledge/sim/rng.hpp"

namespace fledge::sim {

void MlProblem::batch_grad(const Eigen::VectorXd& x, int worker, std::span<const int> samples,
                           Eigen::VectorXd& out) const {
  out = Eigen::VectorXd::Zero(dimension());
  Eigen::VectorXd g(dimension());
  for (int s : samples) {
    sample_grad(x, worker, s, g);
    out += g;
  }
  out /= static_cast<double>(samples.size());
}

void MlProblem::worker_gradient(const Eigen::VectorXd& x, int worker, Eigen::VectorXd& out) const {
  out = Eigen::VectorXd::Zero(dimension());
  Eigen::VectorXd g(dimension());
  const int count = num_samples(worker);
  for (int s = 0; s < count; ++s) {
    sample_grad(x, worker, s, g);
    out += g;
  }
  out /= static_cast<double>(count);
}

void MlProblem::full_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
  out = Eigen::VectorXd::Zero(dimension());
  Eigen::VectorXd g(dimension());
  for (int n = 0; n < num_workers(); ++n) {
    worker_gradient(x, n, g);
    out += g;
  }
  out /= static_cast<double>(num_workers());
}

double MlProblem::full_loss(const Eigen::VectorXd& x) const {
  double total = 0.0;
  for (int n = 0; n < num_workers(); ++n) {
    double worker_sum = 0.0;
    const int count = num_samples(n);
    for (int s = 0; s < count; ++s) worker_sum += sample_loss(x, n, s);
    total += worker_sum / static_cast<double>(count);
  }
  return total / static_cast<double>(num_workers());
}

Eigen::VectorXd initial_model(int dimension, std::uint64_t seed) {
  Rng rng(derive_seed(seed, StreamPurpose::kModelInit));
  Eigen::VectorXd x(dimension);
  double scale = 1.0 / std::sqrt(static_cast<double>(dimension));
  for (int i = 0; i < dimension; ++i) x[i] = scale * rng.normal();
  return x;
}

}  // namespace fledge::sim
