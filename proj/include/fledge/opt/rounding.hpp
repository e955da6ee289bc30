#pragma once

#include <optional>

#include "fledge/opt/equivalent.hpp"

namespace fledge::opt {

struct RoundingOptions {
  double feas_tol = 1e-6;    // slack on the original time/convergence limits
  int k0_retry = 64;         // extra ceiling steps on K0 when no corner fits
  int max_candidates = 4096; // nearest floor/ceil combinations examined
};

struct RoundedChoice {
  cost::AlgorithmParams params;
  double energy = 0.0;
  double time = 0.0;
  double conv_error = 0.0;
};

// Searches floor/ceil corners of the relaxed iterate for the minimum-energy
// integer point satisfying the original time and convergence-error limits
// exactly (true max terms). In full-optimization mode the constant step is
// re-tuned per candidate by minimizing the convergence bound over (0, 1/L].
// Ties break toward the lexicographically smallest (K0, ..., KN, B).
std::optional<RoundedChoice> round_to_integers(const EquivalentProblem& problem,
                                               const gp::Point& relaxed,
                                               const RoundingOptions& opts = {});

}  // namespace fledge::opt
