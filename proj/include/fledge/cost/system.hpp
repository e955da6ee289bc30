#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

// Edge-system description and the closed-form time/energy cost models.
// Index 0 is always the server; 1..N are workers.

namespace fledge::cost {

// Sentinel for "no quantization" (the s = infinity case).
inline constexpr std::uint64_t kNoQuantization = 0;

// Defaults for the built-in norm-scaled stochastic quantizer:
//   q_s = min(D/s^2, sqrt(D)/s), M_s = 32 + D(1 + ceil(log2(s+1))) bits;
// s = infinity sends raw 64-bit reals: q = 0, M = 64 D.
double default_quant_variance(int model_dim, std::uint64_t s);
double default_quant_bits(int model_dim, std::uint64_t s);

// q_{s0,sn} = q0 + qn + q0*qn = (1+q0)(1+qn) - 1.
double q_combine(double q0, double qn);

struct SystemProfile {
  int num_workers = 0;                     // N
  std::vector<double> cpu_freq;            // F, cycles/s
  std::vector<double> tx_power;            // p, W
  std::vector<double> rate;                // r, b/s
  std::vector<std::uint64_t> quant_level;  // s, kNoQuantization = exact
  std::vector<double> cycles;              // C_0: per global update, C_n: per sample gradient
  std::vector<double> switched_cap;        // alpha
  int model_dim = 0;                       // D, feeds the default q/M tables
  std::map<std::uint64_t, double> q_table;     // optional per-s overrides
  std::map<std::uint64_t, double> bits_table;  // optional per-s overrides

  double quant_variance(std::uint64_t s) const;
  double quant_bits(std::uint64_t s) const;
  double q_combined(int worker) const;  // q_{s0,sn}, worker in 1..N

  void validate() const;  // throws std::invalid_argument naming the bad field
};

struct MlConstants {
  double smooth_L = 0.0;    // gradient Lipschitz constant
  double grad_noise = 0.0;  // sigma: per-sample gradient std-dev bound
  double grad_bound = 0.0;  // G: per-sample gradient second-moment bound
  double f_init = 0.0;      // loss at the initial model
  double f_star_lb = 0.0;   // lower bound on the optimal loss
  int dim = 0;

  void validate() const;
};

struct DerivedConstants {
  double c1, c2, c3, c4;
};

// c1 = 2N(f_init - f_star_lb), c2 = 4 G^2 L^2, c3 = L sigma^2 / N, c4 = 2 L G^2.
DerivedConstants derived_constants(const MlConstants& ml, int num_workers);

struct ConstantStep {
  double gamma = 0.0;
};
struct ExponentialStep {
  double gamma = 0.0;
  double decay = 0.0;  // in (0,1); step at round k0 is gamma * decay^(k0-1)
};
struct DiminishingStep {
  double gamma = 0.0;
  double offset = 0.0;  // > 0; step at round k0 is offset*gamma/(k0 + offset)
};
struct ArbitrarySteps {
  std::vector<double> gammas;  // one per global round
};
using StepRule = std::variant<ConstantStep, ExponentialStep, DiminishingStep, ArbitrarySteps>;

// Materializes the per-round step sizes for k0 = 1..K0.
std::vector<double> step_sequence(const StepRule& rule, int global_rounds);

struct AlgorithmParams {
  std::vector<double> iterations;  // K_0..K_N (continuous until rounded)
  double batch = 1.0;              // B
  StepRule rule = ConstantStep{};

  double k0() const { return iterations.at(0); }
  int workers() const { return static_cast<int>(iterations.size()) - 1; }
  // Throws unless sizes match the profile and all entries are >= 1 and the
  // step sizes lie in (0, 1/L].
  void validate(const SystemProfile& sys, double smooth_L) const;
};

struct Limits {
  double time_max = 0.0;        // seconds
  double conv_error_max = 0.0;  // cap on the convergence-error bound

  void validate() const;
};

// Overall wall time of one run: K0 (B max_n C_n K_n / F_n + C_0/F_0
//                                    + max_n M_{s_n}/r_n + M_{s_0}/r_0).
double time_cost(const AlgorithmParams& params, const SystemProfile& sys);

// Overall energy: K0 (B sum_n alpha_n C_n F_n^2 K_n + alpha_0 C_0 F_0^2
//                     + sum_{n in {0..N}} p_n M_{s_n}/r_n).
double energy_cost(const AlgorithmParams& params, const SystemProfile& sys);

}  // namespace fledge::cost
