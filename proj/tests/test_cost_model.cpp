#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <random>

#include "fledge/cost/convergence.hpp"
#include "fledge/cost/estimate.hpp"
#include "fledge/cost/system.hpp"
#include "fledge/io/synthetic.hpp"
#include "support.hpp"

using namespace fledge::cost;
using testsupport::reference_ml;
using testsupport::reference_system;

namespace {

SystemProfile unit_system() {
  SystemProfile sys;
  sys.num_workers = 1;
  sys.model_dim = 1;
  sys.cpu_freq = {1.0, 1.0};
  sys.tx_power = {1.0, 1.0};
  sys.rate = {1.0, 1.0};
  sys.quant_level = {5, 5};
  sys.cycles = {1.0, 1.0};
  sys.switched_cap = {1.0, 1.0};
  sys.bits_table[5] = 1.0;
  sys.q_table[5] = 0.5;
  return sys;
}

}  // namespace

TEST_CASE("q_combine") {
  CHECK(q_combine(0.0, 0.0) == 0.0);
  CHECK(q_combine(0.0, 0.37) == 0.37);
  CHECK(q_combine(0.5, 0.5) == doctest::Approx(1.25));

  std::mt19937_64 rng(11u);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    double a = u(rng), b = u(rng);
    CHECK(q_combine(a, b) == doctest::Approx((1.0 + a) * (1.0 + b) - 1.0).epsilon(1e-14));
  }
}

TEST_CASE("derived constants") {
  MlConstants ml;
  ml.smooth_L = 1.0;
  ml.grad_noise = 1.0;
  ml.grad_bound = 1.0;
  ml.f_init = 0.7;
  ml.f_star_lb = 0.7;
  ml.dim = 1;
  auto c = derived_constants(ml, 1);
  CHECK(c.c1 == 0.0);
  CHECK(c.c2 == 4.0);
  CHECK(c.c3 == 1.0);
  CHECK(c.c4 == 2.0);

  auto ref = reference_ml();
  auto cr = derived_constants(ref, 10);
  long double c2 = 4.0L * 33.63L * 33.63L * 0.084L * 0.084L;
  long double c3 = 0.084L * 33.18L * 33.18L / 10.0L;
  long double c4 = 2.0L * 0.084L * 33.63L * 33.63L;
  CHECK(cr.c2 == doctest::Approx((double)c2).epsilon(1e-14));
  CHECK(cr.c3 == doctest::Approx((double)c3).epsilon(1e-14));
  CHECK(cr.c4 == doctest::Approx((double)c4).epsilon(1e-14));

  ref.grad_bound *= 2.0;
  auto c_doubled = derived_constants(ref, 10);
  CHECK(c_doubled.c2 == doctest::Approx(4.0 * cr.c2).epsilon(1e-14));
  CHECK(c_doubled.c4 == doctest::Approx(4.0 * cr.c4).epsilon(1e-14));
}

TEST_CASE("time cost") {
  auto sys = unit_system();
  AlgorithmParams p;
  p.iterations = {1.0, 1.0};
  p.batch = 1.0;
  CHECK(time_cost(p, sys) == doctest::Approx(4.0));

  p.iterations[0] = 2.0;
  CHECK(time_cost(p, sys) == doctest::Approx(8.0));  // linear in K0

  auto ref = reference_system();
  AlgorithmParams q;
  q.iterations = std::vector<double>(11, 10.0);
  q.iterations[0] = 100.0;
  q.batch = 32.0;
  long double want = testsupport::oracle_time(q.iterations, q.batch, ref);
  CHECK(time_cost(q, ref) == doctest::Approx((double)want).epsilon(1e-12));
}

TEST_CASE("energy cost") {
  auto sys = unit_system();
  AlgorithmParams p;
  p.iterations = {1.0, 1.0};
  p.batch = 1.0;
  CHECK(energy_cost(p, sys) == doctest::Approx(4.0));  // 1*(1 + 1 + 2)

  AlgorithmParams other = p;
  other.rule = DiminishingStep{0.3, 7.0};
  CHECK(energy_cost(other, sys) == energy_cost(p, sys));  // rule-independent

  auto ref = reference_system();
  AlgorithmParams q;
  q.iterations = std::vector<double>(11, 7.0);
  q.iterations[0] = 250.0;
  q.batch = 16.0;
  long double want = testsupport::oracle_energy(q.iterations, q.batch, ref);
  CHECK(energy_cost(q, ref) == doctest::Approx((double)want).epsilon(1e-12));
}

TEST_CASE("general convergence error") {
  auto sys = reference_system();
  auto ml = reference_ml();
  std::vector<double> k = {40.0, 3, 5, 2, 8, 1, 4, 2, 6, 3, 5};

  // Constant sequence reproduces the constant-rule closed form.
  std::vector<double> gam(40, 0.01);
  double general = conv_error_general(gam, k, 16.0, sys, ml);
  double closed = conv_error_constant(0.01, 40.0, k, 16.0, sys, ml);
  CHECK(general == doctest::Approx(closed).epsilon(1e-13));

  // No quantization anywhere kills the fourth term.
  auto exact = sys;
  for (auto& s : exact.quant_level) s = kNoQuantization;
  double no_quant = conv_error_general(gam, k, 16.0, sys, ml) -
                    conv_error_general(gam, k, 16.0, exact, ml);
  auto agg = worker_aggregates(k, sys);
  auto c = derived_constants(ml, sys.num_workers);
  double s1 = 0, s2 = 0;
  for (double g : gam) s1 += g, s2 += g * g;
  CHECK(no_quant == doctest::Approx(c.c4 * agg.sum_qk2 * s2 / (agg.sum_k * s1)).epsilon(1e-10));

  // Random instances against the long-double term-by-term oracle.
  std::mt19937_64 rng(71u);
  std::uniform_real_distribution<double> uk(1.0, 20.0), ub(1.0, 64.0), ug(1e-4, 1.0 / ml.smooth_L);
  std::uniform_int_distribution<int> rounds(1, 50);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> kk(11);
    kk[0] = uk(rng);
    for (int i = 1; i <= 10; ++i) kk[i] = uk(rng);
    int k0 = rounds(rng);
    std::vector<double> gg(k0);
    for (auto& g : gg) g = ug(rng);
    double b = ub(rng);
    double got = conv_error_general(gg, kk, b, sys, ml);
    long double want = testsupport::oracle_conv_general(gg, kk, b, sys, ml);
    CHECK(std::abs(got - (double)want) <= 1e-12 * (double)want);
  }

  CHECK_THROWS_AS(conv_error_general({}, k, 1.0, sys, ml), std::invalid_argument);
}

TEST_CASE("constant-rule convergence error") {
  auto sys = reference_system();
  auto ml = reference_ml();
  std::vector<double> k = {100.0, 2, 2, 2, 2, 2, 5, 5, 5, 5, 5};

  // Large K0 approaches the K0 -> infinity closed form (first term drops).
  auto agg = worker_aggregates(k, sys);
  auto c = derived_constants(ml, sys.num_workers);
  double g = 0.01, b = 32.0;
  double limit = c.c2 * g * g * agg.max_k * agg.max_k + c.c3 * g / b +
                 c.c4 * g * agg.sum_qk2 / agg.sum_k;
  double at_large = conv_error_constant(g, 1e9, k, b, sys, ml);
  CHECK(std::abs(at_large - limit) <= 1e-6 * limit);

  long double want = testsupport::oracle_conv_general(std::vector<double>(100, 0.01), k, b, sys, ml);
  CHECK(conv_error_constant(0.01, 100.0, k, b, sys, ml) ==
        doctest::Approx((double)want).epsilon(1e-12));
}

TEST_CASE("exponential-rule convergence error") {
  auto sys = reference_system();
  auto ml = reference_ml();
  std::vector<double> k = {200.0, 4, 4, 4, 4, 4, 2, 2, 2, 2, 2};
  double b = 8.0;

  // decay -> 1 approaches the constant rule.
  double near_one = conv_error_exponential(0.01, 1.0 - 1e-9, 200.0, k, b, sys, ml);
  double constant = conv_error_constant(0.01, 200.0, k, b, sys, ml);
  CHECK(std::abs(near_one - constant) <= 1e-5 * constant);

  // Equality with the explicit geometric sequence.
  for (auto [gamma, decay, rounds] : {std::tuple{0.02, 0.9995, 400}, {0.05, 0.97, 220}}) {
    auto gammas = testsupport::explicit_exponential(gamma, decay, rounds);
    double closed = conv_error_exponential(gamma, decay, double(rounds), k, b, sys, ml);
    double general = conv_error_general(gammas, k, b, sys, ml);
    CHECK(std::abs(closed - general) <= 1e-10 * general);
  }

  // K0 -> infinity limit.
  auto agg = worker_aggregates(k, sys);
  auto c = derived_constants(ml, sys.num_workers);
  double gamma = 0.02, decay = 0.9995;
  double a1 = (1.0 - decay) / gamma, a2 = gamma * gamma / (1 + decay + decay * decay),
         a3 = gamma / (1 + decay);
  double limit = a1 * c.c1 / agg.sum_k + a2 * c.c2 * agg.max_k * agg.max_k + a3 * c.c3 / b +
                 a3 * c.c4 * agg.sum_qk2 / agg.sum_k;
  double at_large = conv_error_exponential(gamma, decay, 1e9, k, b, sys, ml);
  CHECK(std::abs(at_large - limit) <= 1e-6 * limit);
}

TEST_CASE("diminishing-rule convergence error upper-bounds the explicit sequence") {
  auto sys = reference_system();
  auto ml = reference_ml();
  std::mt19937_64 rng(1234u);
  std::uniform_real_distribution<double> uk(1.0, 12.0), ub(1.0, 64.0);
  std::uniform_int_distribution<int> rounds(2, 10000);

  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> k(11);
    k[0] = uk(rng);
    for (int i = 1; i <= 10; ++i) k[i] = uk(rng);
    double b = ub(rng);
    int k0 = rounds(rng);
    double gamma = 0.02, offset = 600.0;
    auto gammas = testsupport::explicit_diminishing(gamma, offset, k0);
    double bound = conv_error_diminishing(gamma, offset, double(k0), k, b, sys, ml);
    double exact = conv_error_general(gammas, k, b, sys, ml);
    CHECK(bound > exact);  // strict upper bound
  }

  // Bound vanishes as K0 grows (1/log decay).
  std::vector<double> k(11, 3.0);
  double small = conv_error_diminishing(0.02, 600.0, 1e12, k, 4.0, sys, ml);
  double smaller = conv_error_diminishing(0.02, 600.0, 1e13, k, 4.0, sys, ml);
  CHECK(small < 1.0);
  CHECK(smaller < small);

  // Reference spot value against the closed-form recomputation.
  double gamma = 0.02, offset = 600.0, k0 = 2000.0, b = 32.0;
  auto agg = worker_aggregates(k, sys);
  auto c = derived_constants(ml, sys.num_workers);
  long double og = (long double)offset * gamma;
  long double b1 = 1.0L / og;
  long double b2 = og * og / std::pow((long double)offset + 1, 3.0L) +
                   og * og / (2.0L * (offset + 1.0L) * (offset + 1.0L));
  long double b3 = og / ((offset + 1.0L) * (offset + 1.0L)) + og / (offset + 1.0L);
  long double lg = std::log(((long double)k0 + offset + 1.0L) / (offset + 1.0L));
  long double want = (b1 * c.c1 / agg.sum_k + b2 * c.c2 * agg.max_k * agg.max_k +
                      b3 * c.c3 / b + b3 * c.c4 * agg.sum_qk2 / agg.sum_k) /
                     lg;
  CHECK(conv_error_diminishing(gamma, offset, k0, k, b, sys, ml) ==
        doctest::Approx((double)want).epsilon(1e-12));
}

TEST_CASE("monotonicity of the bound in batch size and quantization level") {
  auto sys = reference_system();
  auto ml = reference_ml();
  std::mt19937_64 rng(99u);
  std::uniform_real_distribution<double> uk(1.0, 15.0), ub(1.0, 32.0), ug(1e-3, 1.0 / 0.084);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> k(11);
    for (auto& v : k) v = uk(rng);
    double b = ub(rng);
    std::vector<double> gam(8);
    for (auto& g : gam) g = ug(rng);

    double base = conv_error_general(gam, k, b, sys, ml);
    CHECK(conv_error_general(gam, k, b * 2.0, sys, ml) <= base * (1 + 1e-12));

    auto finer = sys;
    for (auto& s : finer.quant_level) s *= 2;  // larger s => smaller q
    CHECK(conv_error_general(gam, k, b, finer, ml) <= base * (1 + 1e-12));
  }
}

TEST_CASE("costs strictly increase in iterations and batch") {
  auto sys = reference_system();
  AlgorithmParams p;
  p.iterations = std::vector<double>(11, 4.0);
  p.batch = 8.0;
  double t0 = time_cost(p, sys), e0 = energy_cost(p, sys);
  for (int i = 0; i < 11; ++i) {
    auto q = p;
    q.iterations[i] += 1.0;
    CHECK(energy_cost(q, sys) > e0);
    if (i == 0) CHECK(time_cost(q, sys) > t0);
  }
  auto q = p;
  q.batch += 1.0;
  CHECK(energy_cost(q, sys) > e0);
  CHECK(time_cost(q, sys) > t0);
}

TEST_CASE("constant step minimizes the general bound at fixed sum") {
  // For random (K, B, S), the constant sequence S/K0 never loses against a
  // random positive sequence with the same sum and entries <= 1/L.
  auto sys = reference_system();
  auto ml = reference_ml();
  const double cap = 1.0 / ml.smooth_L;
  std::mt19937_64 rng(2024u);
  std::uniform_real_distribution<double> uk(1.0, 8.0), ub(1.0, 16.0), us(0.2, 0.92);
  std::uniform_int_distribution<int> rounds(1, 8);

  for (int inst = 0; inst < 20; ++inst) {
    std::vector<double> k(11);
    for (auto& v : k) v = uk(rng);
    double b = ub(rng);
    int k0 = rounds(rng);
    double sum = us(rng) * k0 * cap;
    std::vector<double> constant(k0, sum / k0);
    double best = conv_error_general(constant, k, b, sys, ml);
    for (int draw = 0; draw < 200; ++draw) {
      std::vector<double> seq(k0);
      double total = 0.0;
      for (auto& g : seq) {
        g = -std::log(1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng));
        total += g;
      }
      double max_g = 0.0;
      for (auto& g : seq) {
        g *= sum / total;
        max_g = std::max(max_g, g);
      }
      if (max_g > cap) {
        // blend toward the feasible center, preserving the sum
        double theta = 0.999 * (cap - sum / k0) / (max_g - sum / k0);
        for (auto& g : seq) g = theta * g + (1.0 - theta) * sum / k0;
      }
      double candidate = conv_error_general(seq, k, b, sys, ml);
      CHECK(best <= candidate * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("estimate constants on a quadratic") {
  fledge::io::QuadraticProblem::Options o;
  o.dimension = 6;
  o.samples_per_worker = 12;
  o.num_workers = 3;
  o.seed = 42;
  fledge::io::QuadraticProblem prob(o);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(prob.matrix().transpose() * prob.matrix());
  double lmax = eig.eigenvalues().maxCoeff();

  EstimateOptions opts;
  opts.sample_budget = 400;
  opts.safety_factor = 1.0;
  opts.seed = 7;
  auto ml = estimate_ml_constants(prob, opts);
  CHECK(std::abs(ml.smooth_L - lmax) <= 0.10 * lmax);
  CHECK(ml.grad_noise > 0.0);
  CHECK(ml.grad_bound > 0.0);
  CHECK(ml.f_init >= ml.f_star_lb);

  // Determinism of the estimator.
  auto again = estimate_ml_constants(prob, opts);
  CHECK(again.smooth_L == ml.smooth_L);
  CHECK(again.grad_bound == ml.grad_bound);
}

namespace {

class ConstantLoss : public fledge::sim::MlProblem {
 public:
  int dimension() const override { return 3; }
  int num_workers() const override { return 2; }
  int num_samples(int) const override { return 4; }
  double sample_loss(const Eigen::VectorXd&, int, int) const override { return 1.0; }
  void sample_grad(const Eigen::VectorXd&, int, int, Eigen::VectorXd& out) const override {
    out = Eigen::VectorXd::Zero(3);
  }
};

}  // namespace

TEST_CASE("estimate rejects vanishing gradients and floors sigma") {
  ConstantLoss flat;
  EstimateOptions opts;
  opts.sample_budget = 64;
  CHECK_THROWS_AS(estimate_ml_constants(flat, opts), std::domain_error);

  fledge::io::QuadraticProblem::Options o;
  o.dimension = 4;
  o.samples_per_worker = 1;  // deterministic per-worker store
  o.num_workers = 2;
  o.seed = 5;
  fledge::io::QuadraticProblem prob(o);
  auto ml = estimate_ml_constants(prob, opts);
  CHECK(ml.grad_noise == 1e-12);
}

TEST_CASE("profile validation names the offending field") {
  auto sys = unit_system();
  sys.rate[1] = -2.0;
  try {
    sys.validate();
    FAIL("expected throw");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("rate[1]") != std::string::npos);
  }
}
