#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>

#include "fledge/sim/rng.hpp"

// Random quantization of transmitted vectors: unbiased, with relative
// variance bounded by q_s, and a fixed bit budget M_s per vector.

namespace fledge::sim {

struct QuantizeResult {
  Eigen::VectorXd value;
  double bits = 0.0;
};

class Quantizer {
 public:
  virtual ~Quantizer() = default;
  virtual QuantizeResult quantize(const Eigen::VectorXd& y, std::uint64_t levels,
                                  Rng& rng) const = 0;
  virtual double variance_factor(int dim, std::uint64_t levels) const = 0;
  virtual double bits(int dim, std::uint64_t levels) const = 0;
};

// Per-coordinate stochastic uniform quantization against the l2 norm:
// out_i = ||y|| sign(y_i) xi_i where xi_i rounds |y_i|/||y|| * s up or down
// stochastically, preserving the expectation. q_s = min(D/s^2, sqrt(D)/s);
// M_s = 32 + D(1 + ceil(log2(s+1))). levels = 0 transmits y exactly.
class NormUniformQuantizer : public Quantizer {
 public:
  QuantizeResult quantize(const Eigen::VectorXd& y, std::uint64_t levels,
                          Rng& rng) const override;
  double variance_factor(int dim, std::uint64_t levels) const override;
  double bits(int dim, std::uint64_t levels) const override;
};

const Quantizer& builtin_quantizer();

}  // namespace fledge::sim
