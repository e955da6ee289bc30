#pragma once

#include <cstdint>
#include <vector>

namespace fledge::io {

// Uniform partition of sample indices after a seeded shuffle; shard sizes
// differ by at most one.
struct ShardPlan {
  int num_workers = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<int>> assignments;
};

ShardPlan make_shard_plan(int num_samples, int num_workers, std::uint64_t seed);

}  // namespace fledge::io
