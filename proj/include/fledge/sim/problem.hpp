#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>

// Training problems as seen by the simulator: per-worker sample stores with
// per-sample loss and gradient. The expected risk is the worker-average of
// the per-worker mean losses.

namespace fledge::sim {

class MlProblem {
 public:
  virtual ~MlProblem() = default;

  virtual int dimension() const = 0;
  virtual int num_workers() const = 0;
  virtual int num_samples(int worker) const = 0;

  virtual double sample_loss(const Eigen::VectorXd& x, int worker, int sample) const = 0;
  virtual void sample_grad(const Eigen::VectorXd& x, int worker, int sample,
                           Eigen::VectorXd& out) const = 0;

  // Mean gradient over a mini-batch of sample indices of one worker.
  // Subclasses may override with a batched implementation.
  virtual void batch_grad(const Eigen::VectorXd& x, int worker, std::span<const int> samples,
                          Eigen::VectorXd& out) const;

  // Mean gradient of one worker's full store (the worker risk f_n).
  virtual void worker_gradient(const Eigen::VectorXd& x, int worker, Eigen::VectorXd& out) const;

  // Gradient and value of f = (1/N) sum_n f_n over all stores.
  virtual void full_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& out) const;
  virtual double full_loss(const Eigen::VectorXd& x) const;

  // Known optimum, when the problem is synthetic.
  virtual std::optional<double> optimal_value() const { return std::nullopt; }
};

// Deterministic initial model: seeded Gaussian with scale 1/sqrt(D).
Eigen::VectorXd initial_model(int dimension, std::uint64_t seed);

}  // namespace fledge::sim
