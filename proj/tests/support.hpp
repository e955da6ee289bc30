#pragma once

// Shared fixtures and independent oracles for the test suites. The oracles
// recompute the closed forms with plain long-double loops so that library
// results are checked against a separate arithmetic path.

#include <cmath>
#include <cstdint>
#include <vector>

#include "fledge/cost/convergence.hpp"
#include "fledge/cost/system.hpp"

namespace testsupport {

// Reference edge system used throughout: one server, ten workers in two
// classes of five. Class means: CPU frequency 1e9 cycles/s, quantization
// parameter 2^14; the ratios skew the classes.
inline fledge::cost::SystemProfile reference_system(double f_ratio = 10.0, double s_ratio = 10.0) {
  fledge::cost::SystemProfile sys;
  sys.num_workers = 10;
  sys.model_dim = 101770;
  double f1 = 2.0e9 * f_ratio / (1.0 + f_ratio);
  double f2 = 2.0e9 / (1.0 + f_ratio);
  auto s1 = static_cast<std::uint64_t>(std::llround(2.0 * 16384.0 * s_ratio / (1.0 + s_ratio)));
  auto s2 = static_cast<std::uint64_t>(std::llround(2.0 * 16384.0 / (1.0 + s_ratio)));
  sys.cpu_freq = {3e9};
  sys.tx_power = {20.0};
  sys.rate = {7.5e7};
  sys.quant_level = {16384};
  sys.cycles = {100.0};
  sys.switched_cap = {2e-28};
  for (int n = 1; n <= 10; ++n) {
    sys.cpu_freq.push_back(n <= 5 ? f1 : f2);
    sys.tx_power.push_back(1.5);
    sys.rate.push_back(5e6);
    sys.quant_level.push_back(n <= 5 ? s1 : s2);
    sys.cycles.push_back(1e8);
    sys.switched_cap.push_back(2e-28);
  }
  return sys;
}

inline fledge::cost::MlConstants reference_ml() {
  fledge::cost::MlConstants ml;
  ml.smooth_L = 0.084;
  ml.grad_noise = 33.18;
  ml.grad_bound = 33.63;
  ml.f_init = std::log(10.0);  // ten-class cross entropy at a random model
  ml.f_star_lb = 0.0;
  ml.dim = 101770;
  return ml;
}

// ---- independent arithmetic oracles (plain loops, long double) ----

inline long double oracle_time(const std::vector<double>& k, double batch,
                               const fledge::cost::SystemProfile& sys) {
  long double compute = 0.0L, uplink = 0.0L;
  for (int n = 1; n <= sys.num_workers; ++n) {
    long double c = (long double)sys.cycles[n] * k[n] / sys.cpu_freq[n];
    if (c > compute) compute = c;
    long double u = (long double)sys.quant_bits(sys.quant_level[n]) / sys.rate[n];
    if (u > uplink) uplink = u;
  }
  long double server = (long double)sys.cycles[0] / sys.cpu_freq[0];
  long double down = (long double)sys.quant_bits(sys.quant_level[0]) / sys.rate[0];
  return (long double)k[0] * ((long double)batch * compute + server + uplink + down);
}

inline long double oracle_energy(const std::vector<double>& k, double batch,
                                 const fledge::cost::SystemProfile& sys) {
  long double compute = 0.0L, comm = 0.0L;
  for (int n = 1; n <= sys.num_workers; ++n) {
    compute += (long double)sys.switched_cap[n] * sys.cycles[n] * sys.cpu_freq[n] *
               sys.cpu_freq[n] * k[n];
  }
  for (int n = 0; n <= sys.num_workers; ++n) {
    comm += (long double)sys.tx_power[n] * sys.quant_bits(sys.quant_level[n]) / sys.rate[n];
  }
  long double server = (long double)sys.switched_cap[0] * sys.cycles[0] * sys.cpu_freq[0] *
                       sys.cpu_freq[0];
  return (long double)k[0] * ((long double)batch * compute + server + comm);
}

// Term-by-term C_A over an explicit step sequence.
inline long double oracle_conv_general(const std::vector<double>& gammas,
                                       const std::vector<double>& k, double batch,
                                       const fledge::cost::SystemProfile& sys,
                                       const fledge::cost::MlConstants& ml) {
  long double n = sys.num_workers;
  long double c1 = 2.0L * n * ((long double)ml.f_init - ml.f_star_lb);
  long double c2 = 4.0L * (long double)ml.grad_bound * ml.grad_bound * ml.smooth_L * ml.smooth_L;
  long double c3 = (long double)ml.smooth_L * ml.grad_noise * ml.grad_noise / n;
  long double c4 = 2.0L * (long double)ml.smooth_L * ml.grad_bound * ml.grad_bound;
  long double s1 = 0.0L, s2 = 0.0L, s3 = 0.0L;
  for (double g : gammas) {
    s1 += g;
    s2 += (long double)g * g;
    s3 += (long double)g * g * g;
  }
  long double sum_k = 0.0L, max_k = 0.0L, sum_qk2 = 0.0L;
  for (int w = 1; w <= sys.num_workers; ++w) {
    sum_k += k[w];
    if (k[w] > max_k) max_k = k[w];
    long double q0 = sys.quant_variance(sys.quant_level[0]);
    long double qn = sys.quant_variance(sys.quant_level[w]);
    long double q = q0 + qn + q0 * qn;
    sum_qk2 += q * (long double)k[w] * k[w];
  }
  return c1 / (sum_k * s1) + c2 * max_k * max_k * s3 / s1 + c3 * s2 / ((long double)batch * s1) +
         c4 * sum_qk2 * s2 / (sum_k * s1);
}

inline std::vector<double> explicit_exponential(double gamma, double decay, int rounds) {
  std::vector<double> g(rounds);
  for (int i = 0; i < rounds; ++i) g[i] = gamma * std::pow(decay, i);
  return g;
}

inline std::vector<double> explicit_diminishing(double gamma, double offset, int rounds) {
  std::vector<double> g(rounds);
  for (int i = 0; i < rounds; ++i) g[i] = offset * gamma / (double(i + 1) + offset);
  return g;
}

}  // namespace testsupport
