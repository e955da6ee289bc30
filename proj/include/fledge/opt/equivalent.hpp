#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "fledge/cost/convergence.hpp"
#include "fledge/cost/system.hpp"
#include "fledge/gp/expr.hpp"

// Differentiable equivalents of the energy-minimization problem, one per
// step-size regime, plus their tangent geometric-program approximations.
// Auxiliary variables: T1 bounds max_n (C_n/F_n) K_n, T2 bounds max_n K_n,
// X0 stands in for decay^K0 in the exponential regime, gamma is the free
// constant step in the full-optimization regime.

namespace fledge::opt {

struct FixedConstant {
  double gamma = 0.0;
};
struct FixedExponential {
  double gamma = 0.0;
  double decay = 0.0;
};
struct FixedDiminishing {
  double gamma = 0.0;
  double offset = 0.0;
};
struct FullOptimization {};
using Mode = std::variant<FixedConstant, FixedExponential, FixedDiminishing, FullOptimization>;

std::string mode_name(const Mode& mode);

enum class Baseline { None, PmSgd, FedAvg, PrSgd };

// A constraint that is not GP-compatible as stated: carries its exact
// normalized evaluator (feasible iff original(x) <= 1) and a builder that
// emits the tangent posynomial surrogate at a reference point.
struct SpecialConstraint {
  std::string name;
  std::function<double(const gp::Point&)> original;
  std::function<gp::Posynomial(const gp::Point&)> surrogate;
  // Excluded from the solved GP (checked on projected iterates instead).
  // Used for the upper exponential link, which together with the lower link
  // would pin X0 exactly to decay^K0 and freeze K0 at its reference.
  bool solve_with_surrogate = true;
};

struct EquivalentProblem {
  Mode mode;
  Baseline baseline = Baseline::None;
  cost::SystemProfile sys;
  cost::MlConstants ml;
  cost::Limits limits;
  int num_workers = 0;

  std::vector<gp::Variable> variables;
  gp::Posynomial energy;
  std::vector<gp::Posynomial> plain_ineq;  // GP-ready constraints, <= 1
  std::vector<std::string> plain_names;    // "bound:" prefix marks variable bounds
  std::vector<gp::Monomial> equalities;    // baseline structure, == 1
  std::vector<std::string> equality_names;
  std::vector<SpecialConstraint> special;

  double energy_at(const gp::Point& x) const { return energy.eval(x); }
  // Max violation over every constraint, originals for the special ones.
  double max_violation(const gp::Point& x) const;
  bool feasible(const gp::Point& x, double tol) const { return max_violation(x) <= tol; }
  // Sets T1, T2 to their tight values and X0 = decay^K0.
  gp::Point tighten(gp::Point x) const;
  // Algorithm parameters carried by a point of this problem.
  cost::AlgorithmParams params_at(const gp::Point& x) const;
};

struct EquivalentOptions {
  // Sample count per worker; required for the FedAvg baseline coupling
  // K_n = l I_n / B.
  double samples_per_worker = 0.0;
};

EquivalentProblem build_equivalent(const Mode& mode, const cost::SystemProfile& sys,
                                   const cost::MlConstants& ml, const cost::Limits& limits,
                                   Baseline baseline = Baseline::None,
                                   const EquivalentOptions& opts = {});

// One surrogate built at a reference, paired with the normalized original it
// tangentially upper-bounds (the pair shares the same <=1 orientation).
struct SurrogatePair {
  std::string name;
  std::function<double(const gp::Point&)> original;
  gp::Posynomial surrogate;
};

// The tangent GP at `ref` (reference must be feasible for the equivalent
// problem). When `pairs` is non-null it receives every surrogate built,
// including any excluded from the solved GP.
gp::GeoProgram build_approx_gp(const EquivalentProblem& problem, const gp::Point& ref,
                               std::vector<SurrogatePair>* pairs = nullptr);

}  // namespace fledge::opt
