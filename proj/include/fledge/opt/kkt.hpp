#pragma once

#include "fledge/opt/equivalent.hpp"

namespace fledge::opt {

struct KktOptions {
  double active_tol = 1e-5;  // log-space activity threshold
  double fd_step = 1e-6;     // central-difference step in log space
};

// First-order residual of the equivalent problem at x, in log space:
// nonnegative multipliers are fitted over the active constraints and the
// result is max(normalized stationarity, complementary slackness, primal
// violation). In the exponential regime X0 is eliminated via X0 = decay^K0
// before differentiating.
double kkt_residual(const EquivalentProblem& problem, const gp::Point& x,
                    const KktOptions& opts = {});

}  // namespace fledge::opt
