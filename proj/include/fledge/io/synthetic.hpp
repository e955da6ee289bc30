#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "fledge/sim/problem.hpp"

// Desk-scale synthetic training problems with analytically known descriptors.

namespace fledge::io {

// Per-sample loss 0.5 ||A x - b_i||^2 with one shared matrix A per problem and
// per-sample targets b_i, i.i.d. across workers. Smoothness and gradient-noise
// descriptors are exact; the gradient second moment is bounded on any ball.
class QuadraticProblem : public sim::MlProblem {
 public:
  struct Options {
    int dimension = 8;
    int samples_per_worker = 16;
    int num_workers = 2;
    std::uint64_t seed = 1;
    bool identity_matrix = false;
    double target_scale = 1.0;  // 0 makes every b_i = 0 (f* = 0)
  };
  explicit QuadraticProblem(const Options& opts);

  int dimension() const override { return static_cast<int>(matrix_.cols()); }
  int num_workers() const override { return static_cast<int>(targets_.size()); }
  int num_samples(int worker) const override {
    return static_cast<int>(targets_[worker].size());
  }
  double sample_loss(const Eigen::VectorXd& x, int worker, int sample) const override;
  void sample_grad(const Eigen::VectorXd& x, int worker, int sample,
                   Eigen::VectorXd& out) const override;
  std::optional<double> optimal_value() const override { return f_star_; }

  // lambda_max(A^T A), by bisection-free power iteration.
  double exact_smoothness() const { return smoothness_; }
  // Per-sample gradient variance is independent of x; this is its exact max
  // over workers.
  double exact_noise_bound() const { return noise_bound_; }
  // sup over ||x||<=radius of any per-sample gradient norm.
  double grad_bound_on_ball(double radius) const;
  const Eigen::MatrixXd& matrix() const { return matrix_; }

 private:
  Eigen::MatrixXd matrix_;                            // A
  Eigen::MatrixXd gram_;                              // A^T A
  std::vector<std::vector<Eigen::VectorXd>> targets_;  // b_i per worker
  double smoothness_ = 0.0;
  double noise_bound_ = 0.0;
  double max_atb_ = 0.0;  // max_i ||A^T b_i||
  double f_star_ = 0.0;
};

// Binary cross-entropy with features of bounded norm, so every descriptor is
// globally bounded and estimable.
class LogisticProblem : public sim::MlProblem {
 public:
  struct Options {
    int dimension = 8;
    int samples_per_worker = 32;
    int num_workers = 2;
    std::uint64_t seed = 1;
    double feature_scale = 1.0;
  };
  explicit LogisticProblem(const Options& opts);

  int dimension() const override { return dim_; }
  int num_workers() const override { return static_cast<int>(features_.size()); }
  int num_samples(int worker) const override {
    return static_cast<int>(labels_[worker].size());
  }
  double sample_loss(const Eigen::VectorXd& x, int worker, int sample) const override;
  void sample_grad(const Eigen::VectorXd& x, int worker, int sample,
                   Eigen::VectorXd& out) const override;

  // ||grad|| <= max feature norm everywhere.
  double grad_bound() const { return max_feature_norm_; }

 private:
  int dim_ = 0;
  std::vector<Eigen::MatrixXd> features_;        // rows are samples
  std::vector<std::vector<double>> labels_;      // +-1
  double max_feature_norm_ = 0.0;
};

enum class SyntheticKind { Quadratic, Logistic };

std::unique_ptr<sim::MlProblem> make_synthetic(SyntheticKind kind, int dimension,
                                               int samples_per_worker, int num_workers,
                                               std::uint64_t seed);

}  // namespace fledge::io
