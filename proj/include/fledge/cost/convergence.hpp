#pragma once

#include "fledge/cost/system.hpp"

// Convergence-error bounds on the weighted average expected squared gradient
// norm, one closed form per step-size rule plus the general sequence form.

namespace fledge::cost {

// C_A: c1/(sumK S1) + c2 maxK^2 S3/S1 + c3 S2/(B S1) + c4 sum_q K^2 S2/(sumK S1)
// with S_p = sum_k gamma_k^p over the sequence.
double conv_error_general(const std::vector<double>& gammas, const std::vector<double>& iterations,
                          double batch, const SystemProfile& sys, const MlConstants& ml);

// C_C, exact closed form under the constant rule.
double conv_error_constant(double gamma, double global_rounds, const std::vector<double>& iterations,
                           double batch, const SystemProfile& sys, const MlConstants& ml);

// C_E, closed form under gamma * decay^(k0-1) with
// a1 = (1-decay)/gamma, a2 = gamma^2/(1+decay+decay^2), a3 = gamma/(1+decay).
double conv_error_exponential(double gamma, double decay, double global_rounds,
                              const std::vector<double>& iterations, double batch,
                              const SystemProfile& sys, const MlConstants& ml);

// C_D, upper bound under offset*gamma/(k0+offset) with
// b1 = 1/(offset gamma), b2/b3 the integral-comparison constants.
double conv_error_diminishing(double gamma, double offset, double global_rounds,
                              const std::vector<double>& iterations, double batch,
                              const SystemProfile& sys, const MlConstants& ml);

// Dispatch on params.rule. For ArbitrarySteps the sequence length must equal
// round(K0).
double conv_error(const AlgorithmParams& params, const SystemProfile& sys, const MlConstants& ml);

// Shared pieces, exposed for the optimizer's constraint builders.
struct WorkerAggregates {
  double sum_k = 0.0;    // sum of K_n over workers
  double max_k = 0.0;    // max K_n over workers
  double sum_qk2 = 0.0;  // sum q_{s0,sn} K_n^2
};
WorkerAggregates worker_aggregates(const std::vector<double>& iterations,
                                   const SystemProfile& sys);

}  // namespace fledge::cost
