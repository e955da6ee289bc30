#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

// Posynomial/monomial algebra over named positive variables.
//
// A monomial is  c * prod_i x_i^{a_i}  with c > 0; a posynomial is a sum of
// monomials. Geometric programs are stated in the standard form
//   min  posynomial
//   s.t. posynomial <= 1,  monomial == 1,
// over the positive orthant.

namespace fledge::gp {

using Point = std::map<std::string, double>;

struct Monomial {
  double coeff = 1.0;
  std::map<std::string, double> exponents;

  Monomial() = default;
  Monomial(double c, std::map<std::string, double> exps);

  double eval(const Point& x) const;

  Monomial operator*(const Monomial& other) const;
  // Divides by another monomial (coeff stays positive).
  Monomial operator/(const Monomial& other) const;
  // Raises to a real power; valid for any p since coeff > 0.
  Monomial pow(double p) const;
};

Monomial constant(double c);
Monomial var(const std::string& name, double exponent = 1.0);

struct Posynomial {
  std::vector<Monomial> terms;

  Posynomial() = default;
  Posynomial(std::initializer_list<Monomial> ts) : terms(ts) {}
  explicit Posynomial(Monomial m) : terms{std::move(m)} {}

  double eval(const Point& x) const;

  Posynomial& operator+=(const Monomial& m);
  Posynomial& operator+=(const Posynomial& p);
  Posynomial operator+(const Posynomial& p) const;
  Posynomial operator*(const Monomial& m) const;
  Posynomial operator/(const Monomial& m) const;

  void validate() const;  // throws std::invalid_argument on non-positive coeff
};

struct Variable {
  std::string name;
  // Bracket hints used by the solver to pre-scale the variable to O(1).
  double lower_hint = 1e-6;
  double upper_hint = 1e12;
  // Optional hard upper bound, encoded internally as (1/ub) * x <= 1.
  std::optional<double> upper_bound;
};

struct GeoProgram {
  std::vector<Variable> variables;
  Posynomial objective;
  std::vector<Posynomial> ineq_constraints;   // each required <= 1
  std::vector<Monomial> mono_eq_constraints;  // each required == 1
  std::vector<std::string> ineq_names;        // optional labels, parallel to ineq_constraints

  const Variable* find_variable(const std::string& name) const;
  // Throws std::invalid_argument if a referenced variable is undeclared or a
  // bound/coefficient is invalid.
  void validate() const;
};

struct FeasibilityCheck {
  bool feasible = true;
  double max_violation = 0.0;  // max over (g_i - 1)+ and |m_j - 1|
};

FeasibilityCheck check_feasible(const GeoProgram& gp, const Point& x, double tol);

}  // namespace fledge::gp
