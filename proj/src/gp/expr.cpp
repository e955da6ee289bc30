#include "fledge/gp/expr.hpp"

#include <cmath>
#include <stdexcept>

namespace fledge::gp {

namespace {

double power(double base, double e) {
  if (e == 0.0) return 1.0;
  if (e == 1.0) return base;
  if (e == -1.0) return 1.0 / base;
  if (e == 2.0) return base * base;
  return std::pow(base, e);
}

}  // namespace

Monomial::Monomial(double c, std::map<std::string, double> exps)
    : coeff(c), exponents(std::move(exps)) {
  if (!(coeff > 0.0) || !std::isfinite(coeff)) {
    throw std::invalid_argument("monomial coefficient must be positive and finite");
  }
  for (const auto& [name, e] : exponents) {
    if (!std::isfinite(e)) {
      throw std::invalid_argument("monomial exponent for '" + name + "' is not finite");
    }
  }
}

double Monomial::eval(const Point& x) const {
  double v = coeff;
  for (const auto& [name, e] : exponents) {
    auto it = x.find(name);
    if (it == x.end()) {
      throw std::invalid_argument("monomial references missing variable '" + name + "'");
    }
    if (!(it->second > 0.0)) {
      throw std::domain_error("variable '" + name + "' must be positive, got " +
                              std::to_string(it->second));
    }
    v *= power(it->second, e);
  }
  return v;
}

Monomial Monomial::operator*(const Monomial& other) const {
  Monomial out = *this;
  out.coeff *= other.coeff;
  for (const auto& [name, e] : other.exponents) {
    double& acc = out.exponents[name];
    acc += e;
    if (acc == 0.0) out.exponents.erase(name);
  }
  return out;
}

Monomial Monomial::operator/(const Monomial& other) const {
  return *this * other.pow(-1.0);
}

Monomial Monomial::pow(double p) const {
  Monomial out;
  out.coeff = power(coeff, p);
  for (const auto& [name, e] : exponents) {
    if (e * p != 0.0) out.exponents[name] = e * p;
  }
  return out;
}

Monomial constant(double c) { return Monomial(c, {}); }

Monomial var(const std::string& name, double exponent) {
  return Monomial(1.0, {{name, exponent}});
}

double Posynomial::eval(const Point& x) const {
  // Kahan summation; cost-model coefficients span many orders of magnitude.
  double sum = 0.0, comp = 0.0;
  for (const auto& m : terms) {
    double y = m.eval(x) - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

Posynomial& Posynomial::operator+=(const Monomial& m) {
  terms.push_back(m);
  return *this;
}

Posynomial& Posynomial::operator+=(const Posynomial& p) {
  terms.insert(terms.end(), p.terms.begin(), p.terms.end());
  return *this;
}

Posynomial Posynomial::operator+(const Posynomial& p) const {
  Posynomial out = *this;
  out += p;
  return out;
}

Posynomial Posynomial::operator*(const Monomial& m) const {
  Posynomial out;
  out.terms.reserve(terms.size());
  for (const auto& t : terms) out.terms.push_back(t * m);
  return out;
}

Posynomial Posynomial::operator/(const Monomial& m) const {
  return *this * m.pow(-1.0);
}

void Posynomial::validate() const {
  if (terms.empty()) throw std::invalid_argument("posynomial must have at least one term");
  for (const auto& t : terms) {
    if (!(t.coeff > 0.0) || !std::isfinite(t.coeff)) {
      throw std::invalid_argument("posynomial term coefficient must be positive and finite");
    }
  }
}

const Variable* GeoProgram::find_variable(const std::string& name) const {
  for (const auto& v : variables) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

void GeoProgram::validate() const {
  if (variables.empty()) throw std::invalid_argument("geo program declares no variables");
  for (const auto& v : variables) {
    if (v.upper_bound && !(*v.upper_bound > 0.0)) {
      throw std::invalid_argument("upper bound for '" + v.name + "' must be positive");
    }
    if (!(v.lower_hint > 0.0) || !(v.upper_hint >= v.lower_hint)) {
      throw std::invalid_argument("bracket hints for '" + v.name + "' are invalid");
    }
  }
  auto check_refs = [&](const Monomial& m) {
    for (const auto& [name, e] : m.exponents) {
      (void)e;
      if (!find_variable(name)) {
        throw std::invalid_argument("constraint references undeclared variable '" + name + "'");
      }
    }
  };
  objective.validate();
  for (const auto& m : objective.terms) check_refs(m);
  for (const auto& p : ineq_constraints) {
    p.validate();
    for (const auto& m : p.terms) check_refs(m);
  }
  for (const auto& m : mono_eq_constraints) check_refs(m);
}

FeasibilityCheck check_feasible(const GeoProgram& gp, const Point& x, double tol) {
  FeasibilityCheck out;
  auto bump = [&](double v) { out.max_violation = std::max(out.max_violation, v); };
  for (const auto& p : gp.ineq_constraints) {
    bump(p.eval(x) - 1.0);
  }
  for (const auto& v : gp.variables) {
    if (v.upper_bound) {
      auto it = x.find(v.name);
      if (it != x.end()) bump(it->second / *v.upper_bound - 1.0);
    }
  }
  for (const auto& m : gp.mono_eq_constraints) {
    bump(std::abs(m.eval(x) - 1.0));
  }
  out.feasible = out.max_violation <= tol;
  return out;
}

}  // namespace fledge::gp
