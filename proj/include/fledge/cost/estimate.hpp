#pragma once

#include <cstdint>

#include "fledge/cost/system.hpp"
#include "fledge/sim/problem.hpp"

// Pre-training estimation of the problem descriptors (L, sigma, G, f_init)
// by sampling the loss landscape.

namespace fledge::cost {

struct EstimateOptions {
  int sample_budget = 2000;     // total gradient evaluations to spend
  double safety_factor = 1.1;   // inflation applied to every estimate
  double radius = 1.0;          // sampling radius around the initial model
  std::uint64_t seed = 1;
  double f_star_lb = 0.0;       // known lower bound on the optimum
};

// L-hat: max gradient-difference ratio over sampled pairs, sharpened by a few
// power-iteration steps from the best pair. sigma-hat: max per-sample gradient
// variance at sampled points (floored at 1e-12 for deterministic problems).
// G-hat: max per-sample gradient norm; throws std::domain_error when every
// sampled gradient vanishes.
MlConstants estimate_ml_constants(const sim::MlProblem& problem, const EstimateOptions& opts);

}  // namespace fledge::cost
