#include "fledge/io/shard.hpp"

#include <numeric>
#include <stdexcept>

#include "fledge/sim/rng.hpp"

namespace fledge::io {

ShardPlan make_shard_plan(int num_samples, int num_workers, std::uint64_t seed) {
  if (num_samples < num_workers || num_workers < 1) {
    throw std::invalid_argument("shard plan: need at least one sample per worker");
  }
  std::vector<int> order(num_samples);
  std::iota(order.begin(), order.end(), 0);
  sim::Rng rng(sim::derive_seed(seed, sim::StreamPurpose::kShard));
  for (int i = num_samples - 1; i > 0; --i) {
    int j = rng.uniform_int(i + 1);
    std::swap(order[i], order[j]);
  }

  ShardPlan plan;
  plan.num_workers = num_workers;
  plan.seed = seed;
  plan.assignments.resize(num_workers);
  for (int i = 0; i < num_samples; ++i) {
    plan.assignments[i % num_workers].push_back(order[i]);
  }
  return plan;
}

}  // namespace fledge::io
