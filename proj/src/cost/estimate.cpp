#include "fledge/cost/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fledge/sim/rng.hpp"

namespace fledge::cost {

namespace {

Eigen::VectorXd random_point(sim::Rng& rng, const Eigen::VectorXd& center, double radius) {
  Eigen::VectorXd x(center.size());
  double scale = radius / std::sqrt(static_cast<double>(center.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = center[i] + scale * rng.normal();
  return x;
}

}  // namespace

MlConstants estimate_ml_constants(const sim::MlProblem& problem, const EstimateOptions& opts) {
  if (opts.sample_budget < 8) {
    throw std::invalid_argument("estimate_ml_constants: sample_budget must be >= 8");
  }
  const int dim = problem.dimension();
  const int workers = problem.num_workers();
  sim::Rng rng(sim::derive_seed(opts.seed, sim::StreamPurpose::kEstimate));
  Eigen::VectorXd x0 = sim::initial_model(dim, opts.seed);

  // Smoothness: random difference quotients of the worker gradients, then
  // power iteration along the best direction (exact for quadratics).
  double l_hat = 0.0;
  Eigen::VectorXd best_x = x0, best_dir = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd gx(dim), gy(dim);
  const int pair_rounds = std::max(4, opts.sample_budget / (4 * std::max(1, workers)));
  for (int trial = 0; trial < pair_rounds; ++trial) {
    Eigen::VectorXd x = random_point(rng, x0, opts.radius);
    Eigen::VectorXd y = random_point(rng, x0, opts.radius);
    double dist = (x - y).norm();
    if (dist < 1e-12) continue;  // zero-distance pair, resample
    for (int n = 0; n < workers; ++n) {
      problem.worker_gradient(x, n, gx);
      problem.worker_gradient(y, n, gy);
      double ratio = (gx - gy).norm() / dist;
      if (ratio > l_hat) {
        l_hat = ratio;
        best_x = x;
        best_dir = (x - y) / dist;
      }
    }
  }
  if (best_dir.norm() > 0.0) {
    const double h = 1e-4 * opts.radius;
    for (int iter = 0; iter < 40; ++iter) {
      double worst = 0.0;
      Eigen::VectorXd worst_dir = best_dir;
      for (int n = 0; n < workers; ++n) {
        problem.worker_gradient(best_x + h * best_dir, n, gx);
        problem.worker_gradient(best_x - h * best_dir, n, gy);
        Eigen::VectorXd hd = (gx - gy) / (2.0 * h);
        double ratio = hd.norm();
        if (ratio > worst) {
          worst = ratio;
          worst_dir = hd / std::max(ratio, 1e-300);
        }
      }
      if (worst <= l_hat * (1.0 + 1e-10) && iter > 4) break;
      l_hat = std::max(l_hat, worst);
      best_dir = worst_dir;
    }
  }

  // Noise and second moment: per-sample gradients at sampled points.
  double sigma2_hat = 0.0, g2_hat = 0.0;
  Eigen::VectorXd g(dim), mean(dim);
  const int point_rounds = std::max(2, opts.sample_budget / 4);
  for (int trial = 0; trial < point_rounds; ++trial) {
    Eigen::VectorXd x = trial == 0 ? x0 : random_point(rng, x0, opts.radius);
    for (int n = 0; n < workers; ++n) {
      const int count = problem.num_samples(n);
      mean.setZero();
      double sq_sum = 0.0;
      for (int s = 0; s < count; ++s) {
        problem.sample_grad(x, n, s, g);
        mean += g;
        double sq = g.squaredNorm();
        sq_sum += sq;
        g2_hat = std::max(g2_hat, sq);
      }
      mean /= static_cast<double>(count);
      double var = sq_sum / static_cast<double>(count) - mean.squaredNorm();
      sigma2_hat = std::max(sigma2_hat, std::max(var, 0.0));
    }
  }
  if (!(g2_hat > 0.0)) {
    throw std::domain_error("estimate_ml_constants: all sampled gradients vanish (G would be 0)");
  }

  MlConstants ml;
  ml.smooth_L = l_hat * opts.safety_factor;
  ml.grad_noise = std::max(std::sqrt(sigma2_hat) * opts.safety_factor, 1e-12);
  ml.grad_bound = std::sqrt(g2_hat) * opts.safety_factor;
  ml.f_init = problem.full_loss(x0);
  ml.f_star_lb = opts.f_star_lb;
  ml.dim = dim;
  if (!(ml.smooth_L > 0.0)) {
    throw std::domain_error("estimate_ml_constants: smoothness estimate is 0");
  }
  return ml;
}

}  // namespace fledge::cost
