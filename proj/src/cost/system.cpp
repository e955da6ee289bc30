#include "fledge/cost/system.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace fledge::cost {

namespace {

double kahan_sum(const std::vector<double>& xs) {
  double sum = 0.0, comp = 0.0;
  for (double x : xs) {
    double y = x - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

void require(bool ok, const std::string& field, const std::string& why) {
  if (!ok) throw std::invalid_argument("system profile: " + field + " " + why);
}

}  // namespace

double default_quant_variance(int model_dim, std::uint64_t s) {
  if (s == kNoQuantization) return 0.0;
  double d = static_cast<double>(model_dim);
  double sd = static_cast<double>(s);
  return std::min(d / (sd * sd), std::sqrt(d) / sd);
}

double default_quant_bits(int model_dim, std::uint64_t s) {
  double d = static_cast<double>(model_dim);
  if (s == kNoQuantization) return 64.0 * d;
  // ceil(log2(s+1)) level bits per coordinate, plus sign bit and a 32-bit norm.
  double level_bits = static_cast<double>(std::bit_width(s));
  return 32.0 + d * (1.0 + level_bits);
}

double q_combine(double q0, double qn) { return q0 + qn + q0 * qn; }

double SystemProfile::quant_variance(std::uint64_t s) const {
  auto it = q_table.find(s);
  if (it != q_table.end()) return it->second;
  return default_quant_variance(model_dim, s);
}

double SystemProfile::quant_bits(std::uint64_t s) const {
  auto it = bits_table.find(s);
  if (it != bits_table.end()) return it->second;
  return default_quant_bits(model_dim, s);
}

double SystemProfile::q_combined(int worker) const {
  return q_combine(quant_variance(quant_level.at(0)), quant_variance(quant_level.at(worker)));
}

void SystemProfile::validate() const {
  require(num_workers >= 1, "num_workers", "must be >= 1");
  const std::size_t want = static_cast<std::size_t>(num_workers) + 1;
  require(cpu_freq.size() == want, "cpu_freq", "must have N+1 entries");
  require(tx_power.size() == want, "tx_power", "must have N+1 entries");
  require(rate.size() == want, "rate", "must have N+1 entries");
  require(quant_level.size() == want, "quant_level", "must have N+1 entries");
  require(cycles.size() == want, "cycles", "must have N+1 entries");
  require(switched_cap.size() == want, "switched_cap", "must have N+1 entries");
  require(model_dim >= 1, "model_dim", "must be >= 1");
  auto positive = [&](const std::vector<double>& v, const std::string& field) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      require(v[i] > 0.0 && std::isfinite(v[i]),
              field + "[" + std::to_string(i) + "]", "must be positive and finite");
    }
  };
  positive(cpu_freq, "cpu_freq");
  positive(tx_power, "tx_power");
  positive(rate, "rate");
  positive(cycles, "cycles");
  positive(switched_cap, "switched_cap");
  for (const auto& [s, q] : q_table) {
    if (s == kNoQuantization) {
      require(q == 0.0, "q_table[inf]", "must be 0");
    } else {
      require(q > 0.0, "q_table[" + std::to_string(s) + "]", "must be positive");
    }
  }
  for (const auto& [s, bits] : bits_table) {
    require(bits > 0.0, "bits_table[" + std::to_string(s) + "]", "must be positive");
  }
}

void MlConstants::validate() const {
  if (!(smooth_L > 0.0)) throw std::invalid_argument("ml constants: smooth_L must be > 0");
  if (!(grad_noise > 0.0)) throw std::invalid_argument("ml constants: grad_noise must be > 0");
  if (!(grad_bound > 0.0)) throw std::invalid_argument("ml constants: grad_bound must be > 0");
  if (f_init < f_star_lb) {
    throw std::invalid_argument("ml constants: f_init must be >= f_star_lb");
  }
  if (dim < 1) throw std::invalid_argument("ml constants: dim must be >= 1");
}

DerivedConstants derived_constants(const MlConstants& ml, int num_workers) {
  double n = static_cast<double>(num_workers);
  DerivedConstants c;
  c.c1 = 2.0 * n * (ml.f_init - ml.f_star_lb);
  c.c2 = 4.0 * ml.grad_bound * ml.grad_bound * ml.smooth_L * ml.smooth_L;
  c.c3 = ml.smooth_L * ml.grad_noise * ml.grad_noise / n;
  c.c4 = 2.0 * ml.smooth_L * ml.grad_bound * ml.grad_bound;
  return c;
}

std::vector<double> step_sequence(const StepRule& rule, int global_rounds) {
  std::vector<double> out(static_cast<std::size_t>(global_rounds));
  if (const auto* c = std::get_if<ConstantStep>(&rule)) {
    for (auto& g : out) g = c->gamma;
  } else if (const auto* e = std::get_if<ExponentialStep>(&rule)) {
    for (int k = 0; k < global_rounds; ++k) {
      out[k] = e->gamma * std::pow(e->decay, static_cast<double>(k));
    }
  } else if (const auto* d = std::get_if<DiminishingStep>(&rule)) {
    for (int k = 0; k < global_rounds; ++k) {
      out[k] = d->offset * d->gamma / (static_cast<double>(k + 1) + d->offset);
    }
  } else {
    const auto& a = std::get<ArbitrarySteps>(rule);
    if (static_cast<int>(a.gammas.size()) != global_rounds) {
      throw std::invalid_argument("arbitrary step sequence length must equal K0");
    }
    out = a.gammas;
  }
  return out;
}

void AlgorithmParams::validate(const SystemProfile& sys, double smooth_L) const {
  if (iterations.size() != static_cast<std::size_t>(sys.num_workers) + 1) {
    throw std::invalid_argument("algorithm params: iterations must have N+1 entries");
  }
  for (double k : iterations) {
    if (!(k >= 1.0)) throw std::invalid_argument("algorithm params: every K must be >= 1");
  }
  if (!(batch >= 1.0)) throw std::invalid_argument("algorithm params: batch must be >= 1");
  double cap = 1.0 / smooth_L;
  auto check_gamma = [&](double g) {
    if (!(g > 0.0) || g > cap * (1.0 + 1e-12)) {
      throw std::invalid_argument("algorithm params: step size must lie in (0, 1/L]");
    }
  };
  if (const auto* c = std::get_if<ConstantStep>(&rule)) {
    check_gamma(c->gamma);
  } else if (const auto* e = std::get_if<ExponentialStep>(&rule)) {
    check_gamma(e->gamma);
    if (!(e->decay > 0.0 && e->decay < 1.0)) {
      throw std::invalid_argument("algorithm params: exponential decay must lie in (0,1)");
    }
  } else if (const auto* d = std::get_if<DiminishingStep>(&rule)) {
    check_gamma(d->gamma);
    if (!(d->offset > 0.0)) {
      throw std::invalid_argument("algorithm params: diminishing offset must be > 0");
    }
  } else {
    const auto& a = std::get<ArbitrarySteps>(rule);
    if (a.gammas.empty()) throw std::invalid_argument("algorithm params: empty step sequence");
    for (double g : a.gammas) check_gamma(g);
  }
}

void Limits::validate() const {
  if (!(time_max > 0.0)) throw std::invalid_argument("limits: time_max must be > 0");
  if (!(conv_error_max > 0.0)) throw std::invalid_argument("limits: conv_error_max must be > 0");
}

double time_cost(const AlgorithmParams& params, const SystemProfile& sys) {
  const int n_workers = sys.num_workers;
  double compute_max = 0.0, uplink_max = 0.0;
  for (int n = 1; n <= n_workers; ++n) {
    compute_max = std::max(compute_max, sys.cycles[n] * params.iterations[n] / sys.cpu_freq[n]);
    uplink_max = std::max(uplink_max, sys.quant_bits(sys.quant_level[n]) / sys.rate[n]);
  }
  double server = sys.cycles[0] / sys.cpu_freq[0];
  double downlink = sys.quant_bits(sys.quant_level[0]) / sys.rate[0];
  return params.k0() * (params.batch * compute_max + server + uplink_max + downlink);
}

double energy_cost(const AlgorithmParams& params, const SystemProfile& sys) {
  const int n_workers = sys.num_workers;
  std::vector<double> compute_terms(n_workers), comm_terms(n_workers + 1);
  for (int n = 1; n <= n_workers; ++n) {
    compute_terms[n - 1] = sys.switched_cap[n] * sys.cycles[n] * sys.cpu_freq[n] *
                           sys.cpu_freq[n] * params.iterations[n];
  }
  for (int n = 0; n <= n_workers; ++n) {
    comm_terms[n] = sys.tx_power[n] * sys.quant_bits(sys.quant_level[n]) / sys.rate[n];
  }
  double server = sys.switched_cap[0] * sys.cycles[0] * sys.cpu_freq[0] * sys.cpu_freq[0];
  return params.k0() *
         (params.batch * kahan_sum(compute_terms) + server + kahan_sum(comm_terms));
}

}  // namespace fledge::cost
