#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fledge/gp/expr.hpp"

// Log-space image of a geometric program. Substituting x_i = exp(y_i) turns
// every posynomial into a log-sum-exp of affine forms and every monomial
// equality into an affine equality, so the program becomes smooth and convex.

namespace fledge::gp {

// f(y) = log sum_k exp(c_k + a_k . y)
struct LogSumExp {
  Eigen::VectorXd consts;  // c_k, one per term
  Eigen::MatrixXd coeffs;  // rows a_k

  double value(const Eigen::VectorXd& y) const;
  // Softmax weights at y; also returned by value_grad for reuse.
  void value_grad(const Eigen::VectorXd& y, double& val, Eigen::VectorXd& grad) const;
  void value_grad_hess(const Eigen::VectorXd& y, double& val, Eigen::VectorXd& grad,
                       Eigen::MatrixXd& hess) const;
};

struct ConvexForm {
  std::vector<std::string> var_names;  // y index -> variable name
  LogSumExp objective;                 // minimize
  std::vector<LogSumExp> ineq;         // f_i(y) <= 0
  std::vector<std::string> ineq_names;
  Eigen::MatrixXd eq_coeffs;           // affine equalities: eq_coeffs y = eq_rhs
  Eigen::VectorXd eq_rhs;
  // Pre-scaling shift from bracket hints: y = y_scaled + shift.
  Eigen::VectorXd shift;

  int num_vars() const { return static_cast<int>(var_names.size()); }
  Point to_point(const Eigen::VectorXd& y_scaled) const;
  Eigen::VectorXd from_point(const Point& x) const;
};

// Upper bounds on variables are materialized as extra <=0 rows.
ConvexForm to_convex_form(const GeoProgram& gp);

}  // namespace fledge::gp
