#include "fledge/gp/convex_form.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace fledge::gp {

double LogSumExp::value(const Eigen::VectorXd& y) const {
  Eigen::VectorXd z = consts + coeffs * y;
  double m = z.maxCoeff();
  return m + std::log((z.array() - m).exp().sum());
}

void LogSumExp::value_grad(const Eigen::VectorXd& y, double& val, Eigen::VectorXd& grad) const {
  Eigen::VectorXd z = consts + coeffs * y;
  double m = z.maxCoeff();
  Eigen::VectorXd w = (z.array() - m).exp();
  double s = w.sum();
  val = m + std::log(s);
  grad = coeffs.transpose() * (w / s);
}

void LogSumExp::value_grad_hess(const Eigen::VectorXd& y, double& val, Eigen::VectorXd& grad,
                                Eigen::MatrixXd& hess) const {
  Eigen::VectorXd z = consts + coeffs * y;
  double m = z.maxCoeff();
  Eigen::VectorXd p = (z.array() - m).exp();
  double s = p.sum();
  val = m + std::log(s);
  p /= s;
  grad = coeffs.transpose() * p;
  // A^T (diag(p) - p p^T) A
  hess = coeffs.transpose() * p.asDiagonal() * coeffs - grad * grad.transpose();
}

Point ConvexForm::to_point(const Eigen::VectorXd& y_scaled) const {
  Point x;
  for (int i = 0; i < num_vars(); ++i) {
    x[var_names[i]] = std::exp(y_scaled[i] + shift[i]);
  }
  return x;
}

Eigen::VectorXd ConvexForm::from_point(const Point& x) const {
  Eigen::VectorXd y(num_vars());
  for (int i = 0; i < num_vars(); ++i) {
    auto it = x.find(var_names[i]);
    if (it == x.end()) throw std::invalid_argument("point misses variable '" + var_names[i] + "'");
    if (!(it->second > 0.0)) throw std::domain_error("point coordinate must be positive");
    y[i] = std::log(it->second) - shift[i];
  }
  return y;
}

namespace {

LogSumExp make_lse(const Posynomial& p, const std::unordered_map<std::string, int>& index,
                   const Eigen::VectorXd& shift) {
  const int n = static_cast<int>(shift.size());
  const int k = static_cast<int>(p.terms.size());
  LogSumExp lse;
  lse.consts.resize(k);
  lse.coeffs = Eigen::MatrixXd::Zero(k, n);
  for (int t = 0; t < k; ++t) {
    const Monomial& m = p.terms[t];
    double c = std::log(m.coeff);
    for (const auto& [name, e] : m.exponents) {
      int j = index.at(name);
      lse.coeffs(t, j) = e;
      c += e * shift[j];  // fold the pre-scaling shift into the constant
    }
    lse.consts[t] = c;
  }
  return lse;
}

}  // namespace

ConvexForm to_convex_form(const GeoProgram& gp) {
  gp.validate();
  ConvexForm cf;
  std::unordered_map<std::string, int> index;
  cf.shift.resize(static_cast<int>(gp.variables.size()));
  for (const auto& v : gp.variables) {
    int j = static_cast<int>(cf.var_names.size());
    if (!index.emplace(v.name, j).second) {
      throw std::invalid_argument("duplicate variable '" + v.name + "'");
    }
    cf.var_names.push_back(v.name);
    double mid = 0.5 * (std::log(v.lower_hint) + std::log(v.upper_hint));
    if (v.upper_bound) mid = std::min(mid, std::log(*v.upper_bound) - 1.0);
    cf.shift[j] = mid;
  }

  cf.objective = make_lse(gp.objective, index, cf.shift);
  for (std::size_t i = 0; i < gp.ineq_constraints.size(); ++i) {
    cf.ineq.push_back(make_lse(gp.ineq_constraints[i], index, cf.shift));
    cf.ineq_names.push_back(i < gp.ineq_names.size() ? gp.ineq_names[i]
                                                     : "ineq[" + std::to_string(i) + "]");
  }
  for (const auto& v : gp.variables) {
    if (v.upper_bound) {
      Posynomial bound{Monomial(1.0 / *v.upper_bound, {{v.name, 1.0}})};
      cf.ineq.push_back(make_lse(bound, index, cf.shift));
      cf.ineq_names.push_back("ub:" + v.name);
    }
  }

  const int n = cf.num_vars();
  const int me = static_cast<int>(gp.mono_eq_constraints.size());
  cf.eq_coeffs = Eigen::MatrixXd::Zero(me, n);
  cf.eq_rhs.resize(me);
  for (int i = 0; i < me; ++i) {
    const Monomial& m = gp.mono_eq_constraints[i];
    double rhs = -std::log(m.coeff);
    for (const auto& [name, e] : m.exponents) {
      int j = index.at(name);
      cf.eq_coeffs(i, j) = e;
      rhs -= e * cf.shift[j];
    }
    cf.eq_rhs[i] = rhs;
  }
  return cf;
}

}  // namespace fledge::gp
