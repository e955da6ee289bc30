#include "fledge/cost/convergence.hpp"

#include <cmath>
#include <stdexcept>

namespace fledge::cost {

namespace {

struct PowerSums {
  double s1 = 0.0, s2 = 0.0, s3 = 0.0;
};

PowerSums power_sums(const std::vector<double>& gammas) {
  PowerSums ps;
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;
  auto add = [](double& sum, double& comp, double x) {
    double y = x - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  };
  for (double g : gammas) {
    add(ps.s1, c1, g);
    add(ps.s2, c2, g * g);
    add(ps.s3, c3, g * g * g);
  }
  return ps;
}

}  // namespace

WorkerAggregates worker_aggregates(const std::vector<double>& iterations,
                                   const SystemProfile& sys) {
  WorkerAggregates agg;
  double comp_k = 0.0, comp_q = 0.0;
  auto add = [](double& sum, double& comp, double x) {
    double y = x - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  };
  for (int n = 1; n <= sys.num_workers; ++n) {
    double k = iterations.at(n);
    add(agg.sum_k, comp_k, k);
    agg.max_k = std::max(agg.max_k, k);
    add(agg.sum_qk2, comp_q, sys.q_combined(n) * k * k);
  }
  return agg;
}

double conv_error_general(const std::vector<double>& gammas, const std::vector<double>& iterations,
                          double batch, const SystemProfile& sys, const MlConstants& ml) {
  if (gammas.empty()) throw std::invalid_argument("conv_error_general: empty step sequence");
  DerivedConstants c = derived_constants(ml, sys.num_workers);
  WorkerAggregates agg = worker_aggregates(iterations, sys);
  PowerSums ps = power_sums(gammas);
  return c.c1 / (agg.sum_k * ps.s1) + c.c2 * agg.max_k * agg.max_k * ps.s3 / ps.s1 +
         c.c3 * ps.s2 / (batch * ps.s1) + c.c4 * agg.sum_qk2 * ps.s2 / (agg.sum_k * ps.s1);
}

double conv_error_constant(double gamma, double global_rounds, const std::vector<double>& iterations,
                           double batch, const SystemProfile& sys, const MlConstants& ml) {
  DerivedConstants c = derived_constants(ml, sys.num_workers);
  WorkerAggregates agg = worker_aggregates(iterations, sys);
  return c.c1 / (gamma * global_rounds * agg.sum_k) + c.c2 * gamma * gamma * agg.max_k * agg.max_k +
         c.c3 * gamma / batch + c.c4 * gamma * agg.sum_qk2 / agg.sum_k;
}

double conv_error_exponential(double gamma, double decay, double global_rounds,
                              const std::vector<double>& iterations, double batch,
                              const SystemProfile& sys, const MlConstants& ml) {
  DerivedConstants c = derived_constants(ml, sys.num_workers);
  WorkerAggregates agg = worker_aggregates(iterations, sys);
  double a1 = (1.0 - decay) / gamma;
  double a2 = gamma * gamma / (1.0 + decay + decay * decay);
  double a3 = gamma / (1.0 + decay);
  double log_decay = std::log(decay);
  // 1 - decay^(p K0), computed stably for decay near 1.
  double one_minus_x1 = -std::expm1(global_rounds * log_decay);
  double one_minus_x2 = -std::expm1(2.0 * global_rounds * log_decay);
  double one_minus_x3 = -std::expm1(3.0 * global_rounds * log_decay);
  return a1 * c.c1 / (one_minus_x1 * agg.sum_k) +
         a2 * c.c2 * one_minus_x3 * agg.max_k * agg.max_k / one_minus_x1 +
         a3 * one_minus_x2 / one_minus_x1 *
             (c.c3 / batch + c.c4 * agg.sum_qk2 / agg.sum_k);
}

double conv_error_diminishing(double gamma, double offset, double global_rounds,
                              const std::vector<double>& iterations, double batch,
                              const SystemProfile& sys, const MlConstants& ml) {
  DerivedConstants c = derived_constants(ml, sys.num_workers);
  WorkerAggregates agg = worker_aggregates(iterations, sys);
  double b1 = 1.0 / (offset * gamma);
  double og = offset * gamma;
  double b2 = og * og / ((offset + 1.0) * (offset + 1.0) * (offset + 1.0)) +
              og * og / (2.0 * (offset + 1.0) * (offset + 1.0));
  double b3 = og / ((offset + 1.0) * (offset + 1.0)) + og / (offset + 1.0);
  double log_term = std::log1p(global_rounds / (offset + 1.0));
  return (b1 * c.c1 / agg.sum_k + b2 * c.c2 * agg.max_k * agg.max_k + b3 * c.c3 / batch +
          b3 * c.c4 * agg.sum_qk2 / agg.sum_k) /
         log_term;
}

double conv_error(const AlgorithmParams& params, const SystemProfile& sys,
                  const MlConstants& ml) {
  if (const auto* c = std::get_if<ConstantStep>(&params.rule)) {
    return conv_error_constant(c->gamma, params.k0(), params.iterations, params.batch, sys, ml);
  }
  if (const auto* e = std::get_if<ExponentialStep>(&params.rule)) {
    return conv_error_exponential(e->gamma, e->decay, params.k0(), params.iterations,
                                  params.batch, sys, ml);
  }
  if (const auto* d = std::get_if<DiminishingStep>(&params.rule)) {
    return conv_error_diminishing(d->gamma, d->offset, params.k0(), params.iterations,
                                  params.batch, sys, ml);
  }
  const auto& a = std::get<ArbitrarySteps>(params.rule);
  return conv_error_general(a.gammas, params.iterations, params.batch, sys, ml);
}

}  // namespace fledge::cost
