#pragma once

#include <string>
#include <vector>

namespace fledge::cli {

// Exit codes: 0 success/Converged, 1 usage or config error, 2 Infeasible (or
// bound-validation failure), 3 MaxIterations, 4 RoundingFailed.
int run(std::vector<std::string> args);
int run(int argc, const char* const* argv);

}  // namespace fledge::cli
