#include "fledge/opt/rounding.hpp"

#include <algorithm>
#include <cmath>

namespace fledge::opt {

namespace {

std::string kvar(int n) { return "K" + std::to_string(n); }

// Minimizes the constant-rule convergence bound over gamma in (0, 1/L] by
// ternary search; the bound is strictly convex in gamma.
double best_constant_gamma(const cost::AlgorithmParams& params, const cost::SystemProfile& sys,
                           const cost::MlConstants& ml) {
  double lo = 1e-12, hi = 1.0 / ml.smooth_L;
  auto value = [&](double g) {
    return cost::conv_error_constant(g, params.k0(), params.iterations, params.batch, sys, ml);
  };
  for (int it = 0; it < 200; ++it) {
    double m1 = lo + (hi - lo) / 3.0;
    double m2 = hi - (hi - lo) / 3.0;
    if (value(m1) <= value(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  return 0.5 * (lo + hi);
}

struct Candidate {
  std::vector<double> free_values;  // values of the free integer variables
  double distance = 0.0;
};

// floor/ceil corners of the relaxed values, nearest-first when capped.
std::vector<Candidate> corner_candidates(const std::vector<double>& relaxed, int max_candidates) {
  const int dims = static_cast<int>(relaxed.size());
  std::vector<std::array<double, 2>> choices(dims);
  std::vector<int> widths(dims);
  for (int i = 0; i < dims; ++i) {
    double lo = std::max(1.0, std::floor(relaxed[i]));
    double hi = std::ceil(relaxed[i]);
    choices[i] = {lo, hi};
    widths[i] = (hi > lo) ? 2 : 1;
  }
  long long total = 1;
  for (int w : widths) {
    total *= w;
    if (total > (1 << 20)) break;
  }
  std::vector<Candidate> out;
  if (total <= (1 << 20)) {
    out.reserve(static_cast<std::size_t>(std::min<long long>(total, max_candidates * 4LL)));
    std::vector<int> idx(dims, 0);
    while (true) {
      Candidate c;
      c.free_values.resize(dims);
      for (int i = 0; i < dims; ++i) {
        c.free_values[i] = choices[i][idx[i]];
        c.distance += std::abs(c.free_values[i] - relaxed[i]);
      }
      out.push_back(std::move(c));
      int pos = dims - 1;
      while (pos >= 0) {
        if (++idx[pos] < widths[pos]) break;
        idx[pos] = 0;
        --pos;
      }
      if (pos < 0) break;
    }
  } else {
    // Too many corners: nearest rounding plus single-coordinate flips.
    Candidate base;
    base.free_values.resize(dims);
    for (int i = 0; i < dims; ++i) {
      base.free_values[i] = std::max(1.0, std::round(relaxed[i]));
      base.distance += std::abs(base.free_values[i] - relaxed[i]);
    }
    out.push_back(base);
    for (int i = 0; i < dims; ++i) {
      for (double v : choices[i]) {
        if (v == base.free_values[i]) continue;
        Candidate c = base;
        c.distance += std::abs(v - relaxed[i]) - std::abs(base.free_values[i] - relaxed[i]);
        c.free_values[i] = v;
        out.push_back(std::move(c));
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.free_values < b.free_values;
  });
  if (static_cast<int>(out.size()) > max_candidates) out.resize(max_candidates);
  return out;
}

}  // namespace

std::optional<RoundedChoice> round_to_integers(const EquivalentProblem& problem,
                                               const gp::Point& relaxed,
                                               const RoundingOptions& opts) {
  const int N = problem.num_workers;
  const bool fedavg = problem.baseline == Baseline::FedAvg;
  const bool full_mode = std::holds_alternative<FullOptimization>(problem.mode);

  // Free integer dimensions: (K0, l, B) under FedAvg, else (K0..KN, B).
  std::vector<double> free_relaxed;
  free_relaxed.push_back(relaxed.at("K0"));
  if (fedavg) {
    free_relaxed.push_back(relaxed.at("l"));
  } else {
    for (int n = 1; n <= N; ++n) free_relaxed.push_back(relaxed.at(kvar(n)));
  }
  free_relaxed.push_back(relaxed.at("B"));
  const double per_worker_samples =
      fedavg ? relaxed.at(kvar(1)) * relaxed.at("B") / relaxed.at("l") : 0.0;

  auto assemble = [&](const std::vector<double>& free_values) {
    cost::AlgorithmParams p;
    p.iterations.assign(N + 1, 1.0);
    p.iterations[0] = free_values.front();
    p.batch = free_values.back();
    if (fedavg) {
      double l = free_values[1];
      for (int n = 1; n <= N; ++n) {
        p.iterations[n] = std::max(1.0, std::round(l * per_worker_samples / p.batch));
      }
    } else {
      for (int n = 1; n <= N; ++n) p.iterations[n] = free_values[n];
    }
    if (const auto* c = std::get_if<FixedConstant>(&problem.mode)) {
      p.rule = cost::ConstantStep{c->gamma};
    } else if (const auto* e = std::get_if<FixedExponential>(&problem.mode)) {
      p.rule = cost::ExponentialStep{e->gamma, e->decay};
    } else if (const auto* d = std::get_if<FixedDiminishing>(&problem.mode)) {
      p.rule = cost::DiminishingStep{d->gamma, d->offset};
    } else {
      p.rule = cost::ConstantStep{relaxed.at("gamma")};
    }
    return p;
  };

  std::optional<RoundedChoice> best;
  auto consider = [&](const std::vector<double>& free_values) {
    cost::AlgorithmParams p = assemble(free_values);
    if (full_mode) {
      p.rule = cost::ConstantStep{best_constant_gamma(p, problem.sys, problem.ml)};
    }
    double time = cost::time_cost(p, problem.sys);
    double err = cost::conv_error(p, problem.sys, problem.ml);
    if (time > problem.limits.time_max * (1.0 + opts.feas_tol)) return;
    if (err > problem.limits.conv_error_max * (1.0 + opts.feas_tol)) return;
    double energy = cost::energy_cost(p, problem.sys);
    bool better = !best || energy < best->energy * (1.0 - 1e-12);
    if (!better && best && energy <= best->energy * (1.0 + 1e-12)) {
      // Equal-energy tie: lexicographically smallest (K0, ..., KN, B).
      std::vector<double> lhs = p.iterations, rhs = best->params.iterations;
      lhs.push_back(p.batch);
      rhs.push_back(best->params.batch);
      better = lhs < rhs;
    }
    if (better) best = RoundedChoice{p, energy, time, err};
  };

  for (const auto& cand : corner_candidates(free_relaxed, opts.max_candidates)) {
    consider(cand.free_values);
  }

  // No corner fits: raising K0 relaxes the convergence limit in every rule, so
  // march K0 upward until the time limit kills the search. Small unit steps
  // first, then multiplicative probes: with both limits binding, restoring
  // convergence feasibility after ceiling the other dimensions can need K0
  // growth proportional to K0 itself.
  if (!best) {
    std::vector<double> bumps;
    for (int extra = 1; extra <= std::min(16, opts.k0_retry); ++extra) {
      bumps.push_back(std::ceil(free_relaxed[0]) + extra);
    }
    for (double factor : {1.005, 1.01, 1.02, 1.03, 1.05, 1.08, 1.12, 1.17, 1.25, 1.4,
                          1.6, 1.8, 2.0, 2.5, 3.0, 4.0}) {
      double bumped = std::ceil(free_relaxed[0] * factor);
      if (bumped > bumps.back()) bumps.push_back(bumped);
    }
    std::vector<double> probe = free_relaxed;
    for (double k0 : bumps) {
      probe[0] = k0;
      for (const auto& cand : corner_candidates(probe, opts.max_candidates)) {
        consider(cand.free_values);
      }
      if (best) break;
    }
  }
  return best;
}

}  // namespace fledge::opt
