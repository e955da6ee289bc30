#pragma once

#include <cstdint>
#include <random>

// Seed-derived random streams. Every consumer (sampling, quantization,
// initialization, ...) gets its own stream keyed by (root, purpose, node,
// round), so results cannot depend on execution order across workers.

namespace fledge::sim {

enum class StreamPurpose : std::uint64_t {
  kModelInit = 1,
  kSampling = 2,
  kQuantize = 3,
  kEstimate = 4,
  kShard = 5,
  kProblemGen = 6,
};

std::uint64_t derive_seed(std::uint64_t root, StreamPurpose purpose, std::uint64_t node = 0,
                          std::uint64_t round = 0);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform in [0, 1), 53-bit mantissa.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  int uniform_int(int n) {
    int v = static_cast<int>(uniform() * static_cast<double>(n));
    return v < n ? v : n - 1;
  }

  // Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fledge::sim
