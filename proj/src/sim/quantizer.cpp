#include "fledge/sim/quantizer.hpp"

#include <cmath>

#include "fledge/cost/system.hpp"

namespace fledge::sim {

QuantizeResult NormUniformQuantizer::quantize(const Eigen::VectorXd& y, std::uint64_t levels,
                                              Rng& rng) const {
  const int dim = static_cast<int>(y.size());
  QuantizeResult out;
  out.bits = bits(dim, levels);
  if (levels == cost::kNoQuantization) {
    out.value = y;
    return out;
  }
  double norm = y.norm();
  out.value = Eigen::VectorXd::Zero(dim);
  if (norm == 0.0) return out;

  double s = static_cast<double>(levels);
  for (int i = 0; i < dim; ++i) {
    double level = std::abs(y[i]) / norm * s;
    double low = std::floor(level);
    double xi = (rng.uniform() < level - low) ? low + 1.0 : low;
    out.value[i] = norm * (y[i] < 0.0 ? -1.0 : 1.0) * xi / s;
  }
  return out;
}

double NormUniformQuantizer::variance_factor(int dim, std::uint64_t levels) const {
  return cost::default_quant_variance(dim, levels);
}

double NormUniformQuantizer::bits(int dim, std::uint64_t levels) const {
  return cost::default_quant_bits(dim, levels);
}

const Quantizer& builtin_quantizer() {
  static const NormUniformQuantizer instance;
  return instance;
}

}  // namespace fledge::sim
