#include "fledge/opt/equivalent.hpp"

#include <cmath>
#include <stdexcept>

#include "fledge/opt/condense.hpp"

namespace fledge::opt {

namespace {

using gp::Monomial;
using gp::Point;
using gp::Posynomial;

std::string kvar(int n) { return "K" + std::to_string(n); }

double at(const Point& x, const std::string& name) {
  auto it = x.find(name);
  if (it == x.end()) throw std::invalid_argument("point misses variable '" + name + "'");
  return it->second;
}

struct ConvPieces {
  double c1, c2, c3, c4;
  std::vector<double> q;  // q_{s0,sn} per worker, index 0 unused
  double cap;             // C_max
};

ConvPieces conv_pieces(const cost::SystemProfile& sys, const cost::MlConstants& ml,
                       const cost::Limits& limits) {
  auto c = cost::derived_constants(ml, sys.num_workers);
  ConvPieces p{c.c1, c.c2, c.c3, c.c4, std::vector<double>(sys.num_workers + 1, 0.0),
               limits.conv_error_max};
  for (int n = 1; n <= sys.num_workers; ++n) p.q[n] = sys.q_combined(n);
  return p;
}

double sum_k(const Point& x, int workers) {
  double s = 0.0;
  for (int n = 1; n <= workers; ++n) s += at(x, kvar(n));
  return s;
}

double sum_qk2(const Point& x, const ConvPieces& p, int workers) {
  double s = 0.0;
  for (int n = 1; n <= workers; ++n) {
    double k = at(x, kvar(n));
    s += p.q[n] * k * k;
  }
  return s;
}

Posynomial sum_k_posy(int workers) {
  Posynomial s;
  for (int n = 1; n <= workers; ++n) s += gp::var(kvar(n));
  return s;
}

}  // namespace

std::string mode_name(const Mode& mode) {
  if (std::holds_alternative<FixedConstant>(mode)) return "constant";
  if (std::holds_alternative<FixedExponential>(mode)) return "exponential";
  if (std::holds_alternative<FixedDiminishing>(mode)) return "diminishing";
  return "full";
}

double EquivalentProblem::max_violation(const gp::Point& x) const {
  double worst = 0.0;
  for (const auto& g : plain_ineq) worst = std::max(worst, g.eval(x) - 1.0);
  for (const auto& m : equalities) worst = std::max(worst, std::abs(m.eval(x) - 1.0));
  for (const auto& s : special) worst = std::max(worst, s.original(x) - 1.0);
  for (const auto& v : variables) {
    if (v.upper_bound) worst = std::max(worst, at(x, v.name) / *v.upper_bound - 1.0);
  }
  return worst;
}

gp::Point EquivalentProblem::tighten(gp::Point x) const {
  double t1 = 0.0, t2 = 0.0;
  for (int n = 1; n <= num_workers; ++n) {
    double k = at(x, kvar(n));
    t1 = std::max(t1, sys.cycles[n] * k / sys.cpu_freq[n]);
    t2 = std::max(t2, k);
  }
  x["T1"] = t1;
  x["T2"] = t2;
  if (const auto* e = std::get_if<FixedExponential>(&mode)) {
    // Floored so that large-K0 probes stay in the positive orthant.
    x["X0"] = std::max(std::exp(at(x, "K0") * std::log(e->decay)), 1e-280);
  }
  return x;
}

cost::AlgorithmParams EquivalentProblem::params_at(const gp::Point& x) const {
  cost::AlgorithmParams p;
  p.iterations.resize(num_workers + 1);
  for (int n = 0; n <= num_workers; ++n) p.iterations[n] = at(x, kvar(n));
  p.batch = at(x, "B");
  if (const auto* c = std::get_if<FixedConstant>(&mode)) {
    p.rule = cost::ConstantStep{c->gamma};
  } else if (const auto* e = std::get_if<FixedExponential>(&mode)) {
    p.rule = cost::ExponentialStep{e->gamma, e->decay};
  } else if (const auto* d = std::get_if<FixedDiminishing>(&mode)) {
    p.rule = cost::DiminishingStep{d->gamma, d->offset};
  } else {
    p.rule = cost::ConstantStep{at(x, "gamma")};
  }
  return p;
}

EquivalentProblem build_equivalent(const Mode& mode, const cost::SystemProfile& sys,
                                   const cost::MlConstants& ml, const cost::Limits& limits,
                                   Baseline baseline, const EquivalentOptions& opts) {
  sys.validate();
  ml.validate();
  limits.validate();
  const double inv_l = 1.0 / ml.smooth_L;
  if (const auto* c = std::get_if<FixedConstant>(&mode)) {
    if (!(c->gamma > 0.0 && c->gamma <= inv_l * (1 + 1e-12))) {
      throw std::invalid_argument("constant mode: gamma must lie in (0, 1/L]");
    }
  } else if (const auto* e = std::get_if<FixedExponential>(&mode)) {
    if (!(e->gamma > 0.0 && e->gamma <= inv_l * (1 + 1e-12))) {
      throw std::invalid_argument("exponential mode: gamma must lie in (0, 1/L]");
    }
    if (!(e->decay > 0.0 && e->decay < 1.0)) {
      throw std::invalid_argument("exponential mode: decay must lie in (0,1)");
    }
  } else if (const auto* d = std::get_if<FixedDiminishing>(&mode)) {
    if (!(d->gamma > 0.0 && d->gamma <= inv_l * (1 + 1e-12))) {
      throw std::invalid_argument("diminishing mode: gamma must lie in (0, 1/L]");
    }
    if (!(d->offset > 0.0)) throw std::invalid_argument("diminishing mode: offset must be > 0");
  }
  if (baseline == Baseline::FedAvg && !(opts.samples_per_worker >= 1.0)) {
    throw std::invalid_argument("FedAvg baseline requires samples_per_worker >= 1");
  }

  EquivalentProblem prob;
  prob.mode = mode;
  prob.baseline = baseline;
  prob.sys = sys;
  prob.ml = ml;
  prob.limits = limits;
  prob.num_workers = sys.num_workers;
  const int N = sys.num_workers;

  // Variables with O(1) bracket hints.
  prob.variables.push_back({"K0", 1.0, 1e8, std::nullopt});
  for (int n = 1; n <= N; ++n) prob.variables.push_back({kvar(n), 1.0, 1e5, std::nullopt});
  prob.variables.push_back({"B", 1.0, 1e5, std::nullopt});
  double ratio_lo = sys.cycles[1] / sys.cpu_freq[1], ratio_hi = ratio_lo;
  for (int n = 1; n <= N; ++n) {
    double r = sys.cycles[n] / sys.cpu_freq[n];
    ratio_lo = std::min(ratio_lo, r);
    ratio_hi = std::max(ratio_hi, r);
  }
  prob.variables.push_back({"T1", ratio_lo * 0.5, ratio_hi * 1e5, std::nullopt});
  prob.variables.push_back({"T2", 1.0, 1e5, std::nullopt});

  // Energy objective.
  double fixed_per_round = sys.switched_cap[0] * sys.cycles[0] * sys.cpu_freq[0] * sys.cpu_freq[0];
  for (int n = 0; n <= N; ++n) {
    fixed_per_round += sys.tx_power[n] * sys.quant_bits(sys.quant_level[n]) / sys.rate[n];
  }
  for (int n = 1; n <= N; ++n) {
    double coeff = sys.switched_cap[n] * sys.cycles[n] * sys.cpu_freq[n] * sys.cpu_freq[n];
    prob.energy += Monomial(coeff, {{"K0", 1.0}, {"B", 1.0}, {kvar(n), 1.0}});
  }
  prob.energy += Monomial(fixed_per_round, {{"K0", 1.0}});

  // Epigraph constraints for both max terms.
  for (int n = 1; n <= N; ++n) {
    prob.plain_ineq.push_back(Posynomial{
        Monomial(sys.cycles[n] / sys.cpu_freq[n], {{kvar(n), 1.0}, {"T1", -1.0}})});
    prob.plain_names.push_back("compute_epi:" + std::to_string(n));
    prob.plain_ineq.push_back(Posynomial{Monomial(1.0, {{kvar(n), 1.0}, {"T2", -1.0}})});
    prob.plain_names.push_back("iter_epi:" + std::to_string(n));
  }

  // Time limit; the communication maxima are K,B-independent constants.
  double per_round_fixed = sys.cycles[0] / sys.cpu_freq[0] +
                           sys.quant_bits(sys.quant_level[0]) / sys.rate[0];
  double uplink_max = 0.0;
  for (int n = 1; n <= N; ++n) {
    uplink_max = std::max(uplink_max, sys.quant_bits(sys.quant_level[n]) / sys.rate[n]);
  }
  per_round_fixed += uplink_max;
  prob.plain_ineq.push_back(Posynomial{
      Monomial(per_round_fixed / limits.time_max, {{"K0", 1.0}}),
      Monomial(1.0 / limits.time_max, {{"K0", 1.0}, {"B", 1.0}, {"T1", 1.0}})});
  prob.plain_names.push_back("time_limit");

  // Relaxed integrality keeps K, B >= 1. Variables pinned by a baseline
  // equality skip the bound: it would be identically active and leave the
  // log-space feasible set without interior.
  auto lower_bound_one = [&](const std::string& name) {
    prob.plain_ineq.push_back(Posynomial{gp::var(name, -1.0)});
    prob.plain_names.push_back("bound:" + name + ">=1");
  };
  lower_bound_one("K0");
  if (baseline != Baseline::PmSgd) {
    for (int n = 1; n <= N; ++n) lower_bound_one(kvar(n));
  }
  if (baseline != Baseline::PrSgd) lower_bound_one("B");

  const ConvPieces pieces = conv_pieces(sys, ml, limits);
  const int workers = N;

  auto condensed_sum_k = [workers](const Point& ref) {
    return condense_posynomial(sum_k_posy(workers), ref);
  };

  if (const auto* cm = std::get_if<FixedConstant>(&mode)) {
    double g = cm->gamma;
    SpecialConstraint conv;
    conv.name = "conv_limit";
    conv.original = [pieces, g, workers](const Point& x) {
      double sk = sum_k(x, workers), t2 = at(x, "T2");
      return (pieces.c1 / (g * at(x, "K0") * sk) + pieces.c2 * g * g * t2 * t2 +
              pieces.c3 * g / at(x, "B") + pieces.c4 * g * sum_qk2(x, pieces, workers) / sk) /
             pieces.cap;
    };
    conv.surrogate = [pieces, g, workers, condensed_sum_k](const Point& ref) {
      Monomial mk = condensed_sum_k(ref);
      Posynomial s;
      s += Monomial(pieces.c1 / (g * pieces.cap), {{"K0", -1.0}}) / mk;
      s += Monomial(pieces.c2 * g * g / pieces.cap, {{"T2", 2.0}});
      s += Monomial(pieces.c3 * g / pieces.cap, {{"B", -1.0}});
      for (int n = 1; n <= workers; ++n) {
        s += Monomial(pieces.c4 * g * pieces.q[n] / pieces.cap, {{kvar(n), 2.0}}) / mk;
      }
      return s;
    };
    prob.special.push_back(std::move(conv));
  } else if (std::holds_alternative<FullOptimization>(mode)) {
    prob.variables.push_back({"gamma", 1e-12, inv_l, inv_l});
    prob.plain_ineq.push_back(Posynomial{Monomial(1e-12, {{"gamma", -1.0}})});
    prob.plain_names.push_back("bound:gamma>=eps");

    SpecialConstraint conv;
    conv.name = "conv_limit";
    conv.original = [pieces, workers](const Point& x) {
      double sk = sum_k(x, workers), t2 = at(x, "T2"), g = at(x, "gamma");
      return (pieces.c1 / (g * at(x, "K0") * sk) + pieces.c2 * g * g * t2 * t2 +
              pieces.c3 * g / at(x, "B") + pieces.c4 * g * sum_qk2(x, pieces, workers) / sk) /
             pieces.cap;
    };
    conv.surrogate = [pieces, workers, condensed_sum_k](const Point& ref) {
      Monomial mk = condensed_sum_k(ref);
      Posynomial s;
      s += Monomial(pieces.c1 / pieces.cap, {{"K0", -1.0}, {"gamma", -1.0}}) / mk;
      s += Monomial(pieces.c2 / pieces.cap, {{"T2", 2.0}, {"gamma", 2.0}});
      s += Monomial(pieces.c3 / pieces.cap, {{"B", -1.0}, {"gamma", 1.0}});
      for (int n = 1; n <= workers; ++n) {
        s += Monomial(pieces.c4 * pieces.q[n] / pieces.cap, {{kvar(n), 2.0}, {"gamma", 1.0}}) / mk;
      }
      return s;
    };
    prob.special.push_back(std::move(conv));
  } else if (const auto* em = std::get_if<FixedExponential>(&mode)) {
    prob.variables.push_back({"X0", 1e-25, 1.0, 1.0 - 1e-9});
    const double a1 = (1.0 - em->decay) / em->gamma;
    const double a2 = em->gamma * em->gamma / (1.0 + em->decay + em->decay * em->decay);
    const double a3 = em->gamma / (1.0 + em->decay);
    const double log_inv_decay = -std::log(em->decay);

    auto numerator = [pieces, a1, a2, a3, workers](const Point& x) {
      double t2 = at(x, "T2"), b = at(x, "B"), x0 = at(x, "X0");
      double num = a1 * pieces.c1;
      for (int n = 1; n <= workers; ++n) {
        double k = at(x, kvar(n));
        num += (a2 * pieces.c2 * t2 * t2 + a3 * pieces.c3 / b + pieces.cap * x0) * k +
               a3 * pieces.c4 * pieces.q[n] * k * k;
      }
      return num;
    };
    auto denominator_posy = [pieces, a2, a3, workers]() {
      Posynomial den;
      for (int n = 1; n <= workers; ++n) {
        den += Monomial(pieces.cap, {{kvar(n), 1.0}});
        den += Monomial(a2 * pieces.c2, {{"T2", 2.0}, {"X0", 3.0}, {kvar(n), 1.0}});
        den += Monomial(a3 * pieces.c3, {{"X0", 2.0}, {"B", -1.0}, {kvar(n), 1.0}});
        den += Monomial(a3 * pieces.c4 * pieces.q[n], {{"X0", 2.0}, {kvar(n), 2.0}});
      }
      return den;
    };

    SpecialConstraint conv;
    conv.name = "conv_limit";
    conv.original = [numerator, denominator_posy](const Point& x) {
      return numerator(x) / denominator_posy().eval(x);
    };
    conv.surrogate = [pieces, a1, a2, a3, workers, denominator_posy](const Point& ref) {
      Monomial den = condense_posynomial(denominator_posy(), ref);
      Posynomial num;
      num += gp::constant(a1 * pieces.c1);
      for (int n = 1; n <= workers; ++n) {
        num += Monomial(a2 * pieces.c2, {{"T2", 2.0}, {kvar(n), 1.0}});
        num += Monomial(a3 * pieces.c3, {{"B", -1.0}, {kvar(n), 1.0}});
        num += Monomial(pieces.cap, {{"X0", 1.0}, {kvar(n), 1.0}});
        num += Monomial(a3 * pieces.c4 * pieces.q[n], {{kvar(n), 2.0}});
      }
      return num / den;
    };
    prob.special.push_back(std::move(conv));

    // Lower exponential link: X0 >= decay^K0, i.e. X0 ln(1/X0) <= X0 K0 ln(1/decay).
    SpecialConstraint lower;
    lower.name = "x0_lower_link";
    lower.original = [log_inv_decay](const Point& x) {
      return std::log(1.0 / at(x, "X0")) / (at(x, "K0") * log_inv_decay);
    };
    lower.surrogate = [log_inv_decay](const Point& ref) {
      double x0r = at(ref, "X0");
      Posynomial rhs_inner{Monomial(log_inv_decay, {{"K0", 1.0}}), gp::constant(1.0)};
      Monomial den = gp::var("X0") * condense_posynomial(rhs_inner, ref);
      Posynomial num{Monomial(std::log(1.0 / x0r), {{"X0", 1.0}}), gp::constant(x0r)};
      return num / den;
    };
    prob.special.push_back(std::move(lower));

    // Upper exponential link: X0 <= decay^K0. Its tangent surrogate together
    // with the lower link would pin (K0, X0) at the reference, so the solved
    // GP omits it; iterates are projected back onto X0 = decay^K0 instead.
    SpecialConstraint upper;
    upper.name = "x0_upper_link";
    upper.solve_with_surrogate = false;
    upper.original = [log_inv_decay](const Point& x) {
      return at(x, "K0") * log_inv_decay / std::log(1.0 / at(x, "X0"));
    };
    upper.surrogate = [log_inv_decay](const Point& ref) {
      double x0r = at(ref, "X0");
      double denom = 1.0 + std::log(1.0 / x0r);
      return Posynomial{Monomial(1.0 / (x0r * denom), {{"X0", 1.0}}),
                        Monomial(log_inv_decay / denom, {{"K0", 1.0}})};
    };
    prob.special.push_back(std::move(upper));
  } else {
    const auto* dm = std::get_if<FixedDiminishing>(&mode);
    const double rho = dm->offset;
    const double og = rho * dm->gamma;
    const double b1 = 1.0 / og;
    const double b2 = og * og / std::pow(rho + 1.0, 3.0) + og * og / (2.0 * (rho + 1.0) * (rho + 1.0));
    const double b3 = og / ((rho + 1.0) * (rho + 1.0)) + og / (rho + 1.0);

    SpecialConstraint conv;
    conv.name = "conv_limit";
    conv.original = [pieces, b1, b2, b3, rho, workers](const Point& x) {
      double sk = sum_k(x, workers), t2 = at(x, "T2");
      double lhs = b1 * pieces.c1 / sk + b2 * pieces.c2 * t2 * t2 +
                   b3 * pieces.c3 / at(x, "B") +
                   b3 * pieces.c4 * sum_qk2(x, pieces, workers) / sk;
      return lhs / (pieces.cap * std::log1p(at(x, "K0") / (rho + 1.0)));
    };
    conv.surrogate = [pieces, b1, b2, b3, rho, workers, condensed_sum_k](const Point& ref) {
      Monomial mk = condensed_sum_k(ref);
      double k0r = at(ref, "K0");
      double dhat = pieces.cap * (std::log1p(k0r / (rho + 1.0)) + k0r / (k0r + rho + 1.0));
      Posynomial s;
      s += Monomial(b1 * pieces.c1 / dhat, {}) / mk;
      s += Monomial(b2 * pieces.c2 / dhat, {{"T2", 2.0}});
      s += Monomial(b3 * pieces.c3 / dhat, {{"B", -1.0}});
      for (int n = 1; n <= workers; ++n) {
        s += Monomial(b3 * pieces.c4 * pieces.q[n] / dhat, {{kvar(n), 2.0}}) / mk;
      }
      s += Monomial(pieces.cap * k0r * k0r / ((k0r + rho + 1.0) * dhat), {{"K0", -1.0}});
      return s;
    };
    prob.special.push_back(std::move(conv));
  }

  // Baseline structure as monomial equalities.
  if (baseline == Baseline::PmSgd) {
    for (int n = 1; n <= N; ++n) {
      prob.equalities.push_back(gp::var(kvar(n)));
      prob.equality_names.push_back("pm:" + kvar(n) + "=1");
    }
  } else if (baseline == Baseline::PrSgd) {
    prob.equalities.push_back(gp::var("B"));
    prob.equality_names.push_back("pr:B=1");
  } else if (baseline == Baseline::FedAvg) {
    prob.variables.push_back({"l", 1.0, 1e5, std::nullopt});
    prob.plain_ineq.push_back(Posynomial{gp::var("l", -1.0)});
    prob.plain_names.push_back("bound:l>=1");
    for (int n = 1; n <= N; ++n) {
      prob.equalities.push_back(
          Monomial(1.0 / opts.samples_per_worker, {{kvar(n), 1.0}, {"B", 1.0}, {"l", -1.0}}));
      prob.equality_names.push_back("fa:" + kvar(n) + "=l*I/B");
    }
  }

  return prob;
}

gp::GeoProgram build_approx_gp(const EquivalentProblem& problem, const gp::Point& ref,
                               std::vector<SurrogatePair>* pairs) {
  gp::GeoProgram out;
  out.variables = problem.variables;
  out.objective = problem.energy;
  out.ineq_constraints = problem.plain_ineq;
  out.ineq_names = problem.plain_names;
  out.mono_eq_constraints = problem.equalities;

  const auto* em = std::get_if<FixedExponential>(&problem.mode);
  for (const auto& sc : problem.special) {
    gp::Posynomial surrogate = sc.surrogate(ref);
    if (sc.solve_with_surrogate) {
      out.ineq_constraints.push_back(surrogate);
      out.ineq_names.push_back(sc.name);
    }
    if (!pairs) continue;

    SurrogatePair pair;
    pair.name = sc.name;
    pair.surrogate = surrogate;
    if (em != nullptr && sc.name == "x0_lower_link") {
      double lp = -std::log(em->decay);
      pair.original = [lp](const Point& x) {
        return (std::log(1.0 / at(x, "X0")) + 1.0) / (at(x, "K0") * lp + 1.0);
      };
    } else if (em != nullptr && sc.name == "x0_upper_link") {
      double lp = -std::log(em->decay);
      double x0r = at(ref, "X0");
      pair.original = [lp, x0r](const Point& x) {
        return (at(x, "K0") * lp + std::log(at(x, "X0") / x0r) + 1.0) /
               (1.0 + std::log(1.0 / x0r));
      };
    } else if (std::get_if<FixedDiminishing>(&problem.mode) != nullptr &&
               sc.name == "conv_limit") {
      const auto* dm = std::get_if<FixedDiminishing>(&problem.mode);
      double rho = dm->offset;
      double k0r = at(ref, "K0");
      double ln_r = std::log1p(k0r / (rho + 1.0));
      double dhat = problem.limits.conv_error_max * (ln_r + k0r / (k0r + rho + 1.0));
      auto base = sc.original;
      double cap = problem.limits.conv_error_max;
      pair.original = [base, rho, cap, dhat, ln_r, k0r](const Point& x) {
        double log_term = std::log1p(at(x, "K0") / (rho + 1.0));
        double lhs = base(x) * cap * log_term;  // recover the pre-division terms
        return (lhs + cap * (ln_r + k0r / (k0r + rho + 1.0)) - cap * log_term) / dhat;
      };
    } else {
      pair.original = sc.original;
    }
    pairs->push_back(std::move(pair));
  }
  return out;
}

}  // namespace fledge::opt
