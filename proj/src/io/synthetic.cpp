#include "fledge/io/synthetic.hpp"

#include <cmath>
#include <stdexcept>

#include "fledge/sim/rng.hpp"

namespace fledge::io {

namespace {

double power_iteration_lmax(const Eigen::MatrixXd& sym) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(sym.cols()).normalized();
  double lambda = 0.0;
  for (int it = 0; it < 500; ++it) {
    Eigen::VectorXd w = sym * v;
    double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    lambda = norm;
  }
  return lambda;
}

}  // namespace

QuadraticProblem::QuadraticProblem(const Options& opts) {
  if (opts.dimension < 1 || opts.num_workers < 1 || opts.samples_per_worker < 1) {
    throw std::invalid_argument("quadratic problem: dimension, workers, samples must be >= 1");
  }
  sim::Rng rng(sim::derive_seed(opts.seed, sim::StreamPurpose::kProblemGen));
  const int d = opts.dimension;
  if (opts.identity_matrix) {
    matrix_ = Eigen::MatrixXd::Identity(d, d);
  } else {
    matrix_.resize(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) matrix_(i, j) = rng.normal() / std::sqrt(double(d));
    }
    matrix_ += 0.5 * Eigen::MatrixXd::Identity(d, d);  // keep it well conditioned
  }
  gram_ = matrix_.transpose() * matrix_;
  smoothness_ = power_iteration_lmax(gram_);

  targets_.resize(opts.num_workers);
  Eigen::VectorXd weighted_mean_b = Eigen::VectorXd::Zero(d);
  for (auto& store : targets_) {
    store.resize(opts.samples_per_worker);
    for (auto& b : store) {
      b.resize(d);
      for (int i = 0; i < d; ++i) b[i] = opts.target_scale * rng.normal();
      weighted_mean_b += b;
      max_atb_ = std::max(max_atb_, (matrix_.transpose() * b).norm());
    }
  }
  weighted_mean_b /= static_cast<double>(opts.num_workers * opts.samples_per_worker);

  // Exact per-worker gradient variance: mean_i ||A^T (b_i - mean_b_n)||^2,
  // independent of x because A is shared.
  for (const auto& store : targets_) {
    Eigen::VectorXd mean_b = Eigen::VectorXd::Zero(d);
    for (const auto& b : store) mean_b += b;
    mean_b /= static_cast<double>(store.size());
    double var = 0.0;
    for (const auto& b : store) var += (matrix_.transpose() * (b - mean_b)).squaredNorm();
    noise_bound_ = std::max(noise_bound_, var / static_cast<double>(store.size()));
  }

  // f* from the normal equations A^T A x = A^T mean(b).
  Eigen::VectorXd x_star = gram_.ldlt().solve(matrix_.transpose() * weighted_mean_b);
  double total = 0.0;
  for (const auto& store : targets_) {
    double worker = 0.0;
    for (const auto& b : store) worker += 0.5 * (matrix_ * x_star - b).squaredNorm();
    total += worker / static_cast<double>(store.size());
  }
  f_star_ = total / static_cast<double>(targets_.size());
}

double QuadraticProblem::sample_loss(const Eigen::VectorXd& x, int worker, int sample) const {
  return 0.5 * (matrix_ * x - targets_[worker][sample]).squaredNorm();
}

void QuadraticProblem::sample_grad(const Eigen::VectorXd& x, int worker, int sample,
                                   Eigen::VectorXd& out) const {
  out = matrix_.transpose() * (matrix_ * x - targets_[worker][sample]);
}

double QuadraticProblem::grad_bound_on_ball(double radius) const {
  return smoothness_ * radius + max_atb_;
}

LogisticProblem::LogisticProblem(const Options& opts) : dim_(opts.dimension) {
  if (opts.dimension < 1 || opts.num_workers < 1 || opts.samples_per_worker < 1) {
    throw std::invalid_argument("logistic problem: dimension, workers, samples must be >= 1");
  }
  sim::Rng rng(sim::derive_seed(opts.seed, sim::StreamPurpose::kProblemGen));
  Eigen::VectorXd truth(dim_);
  for (int i = 0; i < dim_; ++i) truth[i] = rng.normal();

  features_.resize(opts.num_workers);
  labels_.resize(opts.num_workers);
  for (int n = 0; n < opts.num_workers; ++n) {
    features_[n].resize(opts.samples_per_worker, dim_);
    labels_[n].resize(opts.samples_per_worker);
    for (int s = 0; s < opts.samples_per_worker; ++s) {
      Eigen::VectorXd phi(dim_);
      for (int i = 0; i < dim_; ++i) phi[i] = rng.normal();
      phi *= opts.feature_scale / std::max(1.0, phi.norm());  // bounded features
      features_[n].row(s) = phi;
      double margin = truth.dot(phi);
      double flip = rng.uniform();
      labels_[n][s] = (flip < 0.9 ? 1.0 : -1.0) * (margin >= 0.0 ? 1.0 : -1.0);
      max_feature_norm_ = std::max(max_feature_norm_, phi.norm());
    }
  }
}

double LogisticProblem::sample_loss(const Eigen::VectorXd& x, int worker, int sample) const {
  double z = -labels_[worker][sample] * features_[worker].row(sample).dot(x);
  // log(1+exp(z)) without overflow
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

void LogisticProblem::sample_grad(const Eigen::VectorXd& x, int worker, int sample,
                                  Eigen::VectorXd& out) const {
  double y = labels_[worker][sample];
  double z = -y * features_[worker].row(sample).dot(x);
  double sig = 1.0 / (1.0 + std::exp(-z));
  out = (-y * sig) * features_[worker].row(sample).transpose();
}

std::unique_ptr<sim::MlProblem> make_synthetic(SyntheticKind kind, int dimension,
                                               int samples_per_worker, int num_workers,
                                               std::uint64_t seed) {
  if (kind == SyntheticKind::Quadratic) {
    QuadraticProblem::Options o;
    o.dimension = dimension;
    o.samples_per_worker = samples_per_worker;
    o.num_workers = num_workers;
    o.seed = seed;
    return std::make_unique<QuadraticProblem>(o);
  }
  LogisticProblem::Options o;
  o.dimension = dimension;
  o.samples_per_worker = samples_per_worker;
  o.num_workers = num_workers;
  o.seed = seed;
  return std::make_unique<LogisticProblem>(o);
}

}  // namespace fledge::io
