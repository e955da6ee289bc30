#include "fledge/sim/rng.hpp"

#include <cmath>

namespace fledge::sim {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, StreamPurpose purpose, std::uint64_t node,
                          std::uint64_t round) {
  std::uint64_t state = root;
  std::uint64_t h = splitmix64(state);
  state ^= static_cast<std::uint64_t>(purpose) * 0xd6e8feb86659fd93ull;
  h ^= splitmix64(state);
  state ^= (node + 1) * 0xa0761d6478bd642full;
  h ^= splitmix64(state);
  state ^= (round + 1) * 0xe7037ed1a0b428dbull;
  h ^= splitmix64(state);
  return h;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  double u2 = uniform();
  while (u1 <= 1e-300) u1 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

}  // namespace fledge::sim
