#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "fledge/gp/convex_form.hpp"
#include "fledge/gp/expr.hpp"
#include "fledge/gp/solver.hpp"

using namespace fledge::gp;

TEST_CASE("monomial evaluation") {
  CHECK(constant(3.0).eval({{"u", 7.0}}) == 3.0);  // constant monomial
  Monomial m(2.0, {{"u", 1.0}, {"v", -1.0}});
  CHECK(m.eval({{"u", 4.0}, {"v", 2.0}}) == doctest::Approx(4.0));
  CHECK(var("u", 0.5).eval({{"u", 9.0}}) == doctest::Approx(3.0));

  CHECK_THROWS_AS(m.eval({{"u", 4.0}}), std::invalid_argument);            // missing variable
  CHECK_THROWS_AS(m.eval({{"u", 4.0}, {"v", -1.0}}), std::domain_error);   // non-positive coord
  CHECK_THROWS_AS(Monomial(-1.0, {}), std::invalid_argument);
}

TEST_CASE("posynomial evaluation") {
  Posynomial p{var("u"), var("u", -1.0)};
  CHECK(p.eval({{"u", 1.0}}) == doctest::Approx(2.0));
  CHECK(p.eval({{"u", 4.0}}) == doctest::Approx(4.25));
}

TEST_CASE("posynomial evaluation matches direct arithmetic on wide-range coefficients") {
  // Energy-style posynomial with coefficients spanning ~30 orders of magnitude,
  // checked against a long-double direct sum.
  const double alpha = 2e-28, C = 1e8, F = 1e9, p_tx = 1.5, M = 1.6e6, r = 5e6;
  Posynomial e;
  e += Monomial(alpha * C * F * F, {{"K0", 1.0}, {"B", 1.0}, {"K1", 1.0}});
  e += Monomial(2e-28 * 100.0 * 3e9 * 3e9, {{"K0", 1.0}});
  e += Monomial(p_tx * M / r, {{"K0", 1.0}});
  Point x{{"K0", 1.0}, {"B", 1.0}, {"K1", 1.0}};
  long double direct = (long double)(alpha * C * F * F) * 1.0L +
                       (long double)(2e-28 * 100.0 * 3e9 * 3e9) +
                       (long double)(p_tx * M / r);
  CHECK(e.eval(x) == doctest::Approx((double)direct).epsilon(1e-14));
}

TEST_CASE("convex form reproduces log-values") {
  GeoProgram gp;
  gp.variables = {{"u", 1.0, 1.0, std::nullopt}};  // unit bracket => zero shift
  gp.objective = Posynomial{Monomial(2.0, {{"u", 1.0}})};
  ConvexForm cf = to_convex_form(gp);
  Eigen::VectorXd y = cf.from_point({{"u", std::exp(1.0)}});
  CHECK(y[0] == doctest::Approx(1.0));
  CHECK(cf.objective.value(y) == doctest::Approx(std::log(2.0 * std::exp(1.0))));

  gp.objective = Posynomial{var("u"), var("u", -1.0)};
  cf = to_convex_form(gp);
  Eigen::VectorXd y0 = cf.from_point({{"u", 1.0}});
  CHECK(cf.objective.value(y0) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("convex form round-trip on random posynomials") {
  std::mt19937_64 rng(20240701u);
  std::uniform_real_distribution<double> coeff(0.1, 10.0);
  std::uniform_real_distribution<double> expo(-3.0, 3.0);
  std::uniform_real_distribution<double> coord(0.05, 20.0);
  std::uniform_int_distribution<int> nterms(1, 6);
  const std::vector<std::string> names{"a", "b", "c"};

  for (int trial = 0; trial < 1000; ++trial) {
    GeoProgram gp;
    for (const auto& n : names) gp.variables.push_back({n, 1e-6, 1e12, std::nullopt});
    Posynomial p;
    int k = nterms(rng);
    for (int t = 0; t < k; ++t) {
      std::map<std::string, double> exps;
      for (const auto& n : names) exps[n] = expo(rng);
      p += Monomial(coeff(rng), exps);
    }
    gp.objective = p;
    ConvexForm cf = to_convex_form(gp);
    Point x{{"a", coord(rng)}, {"b", coord(rng)}, {"c", coord(rng)}};
    double direct = p.eval(x);
    double via_log = std::exp(cf.objective.value(cf.from_point(x)));
    CHECK(std::abs(via_log - direct) <= 1e-12 * direct);
  }
}

namespace {

GeoProgram single_constraint_gp() {
  GeoProgram gp;
  gp.variables = {{"u", 1e-6, 1e12, std::nullopt}};
  gp.objective = Posynomial{var("u")};
  gp.ineq_constraints = {Posynomial{var("u", -1.0)}};
  return gp;
}

}  // namespace

TEST_CASE("solver: single active constraint") {
  // min u s.t. 1/u <= 1; optimum u* = 1.
  auto sol = solve_gp(single_constraint_gp());
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective_value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.point.at("u") == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.kkt_residual <= 1e-8);
}

TEST_CASE("solver: AM-GM pair") {
  // min u + v s.t. 1/(uv) <= 1. By AM-GM, u + v >= 2 sqrt(uv) >= 2 with
  // equality at u = v = 1 (hand KKT: lambda = 1 balances both gradients).
  GeoProgram gp;
  gp.variables = {{"u", 1e-6, 1e12, std::nullopt}, {"v", 1e-6, 1e12, std::nullopt}};
  gp.objective = Posynomial{var("u"), var("v")};
  gp.ineq_constraints = {Posynomial{Monomial(1.0, {{"u", -1.0}, {"v", -1.0}})}};
  auto sol = solve_gp(gp);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective_value == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(sol.point.at("u") == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(sol.point.at("v") == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("solver: n-variable symmetric") {
  // min sum x_i s.t. prod x_i^{-1} <= 1 -> x_i = 1.
  const int n = 5;
  GeoProgram gp;
  Posynomial obj;
  std::map<std::string, double> exps;
  for (int i = 0; i < n; ++i) {
    std::string name = "x" + std::to_string(i);
    gp.variables.push_back({name, 1e-6, 1e12, std::nullopt});
    obj += var(name);
    exps[name] = -1.0;
  }
  gp.objective = obj;
  gp.ineq_constraints = {Posynomial{Monomial(1.0, exps)}};
  auto sol = solve_gp(gp);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective_value == doctest::Approx(double(n)).epsilon(1e-6));
}

TEST_CASE("solver: infeasible via upper bound") {
  // min u s.t. 2/u <= 1 and u <= 1: requires u >= 2 and u <= 1.
  GeoProgram gp;
  gp.variables = {{"u", 1e-6, 1e12, 1.0}};
  gp.objective = Posynomial{var("u")};
  gp.ineq_constraints = {Posynomial{Monomial(2.0, {{"u", -1.0}})}};
  auto sol = solve_gp(gp);
  CHECK(sol.status == SolveStatus::Infeasible);
}

TEST_CASE("solver: deterministic and feasible at optimum") {
  GeoProgram gp;
  gp.variables = {{"u", 1e-3, 1e3, std::nullopt}, {"v", 1e-3, 1e3, std::nullopt}};
  gp.objective = Posynomial{Monomial(3.0, {{"u", 1.0}, {"v", 0.5}}), var("v", -2.0)};
  gp.ineq_constraints = {Posynomial{Monomial(0.5, {{"u", -1.0}}), Monomial(0.25, {{"v", 1.0}})}};
  auto a = solve_gp(gp);
  auto b = solve_gp(gp);
  REQUIRE(a.status == SolveStatus::Optimal);
  REQUIRE(b.status == SolveStatus::Optimal);
  CHECK(a.objective_value == b.objective_value);  // bit-identical
  for (const auto& [name, val] : a.point) CHECK(val == b.point.at(name));
  CHECK(a.kkt_residual == b.kkt_residual);

  auto feas = check_feasible(gp, a.point, 1e-9);
  CHECK(feas.feasible);
}

TEST_CASE("solver: outer objective trace is non-increasing") {
  GeoProgram gp;
  gp.variables = {{"u", 1e-6, 1e12, std::nullopt}, {"v", 1e-6, 1e12, std::nullopt}};
  gp.objective = Posynomial{var("u"), Monomial(2.0, {{"v", 1.0}})};
  gp.ineq_constraints = {
      Posynomial{Monomial(1.0, {{"u", -1.0}, {"v", -1.0}})},
      Posynomial{Monomial(0.5, {{"v", -1.0}})},
  };
  auto sol = solve_gp(gp);
  REQUIRE(sol.status == SolveStatus::Optimal);
  REQUIRE(sol.outer_objectives.size() >= 2);
  for (std::size_t i = 1; i < sol.outer_objectives.size(); ++i) {
    CHECK(sol.outer_objectives[i] <= sol.outer_objectives[i - 1] * (1.0 + 1e-9));
  }
}

TEST_CASE("check_feasible") {
  GeoProgram gp;
  gp.variables = {{"u", 1e-6, 1e12, std::nullopt}};
  gp.objective = Posynomial{var("u")};
  auto ok = check_feasible(gp, {{"u", 0.5}}, 1e-9);
  CHECK(ok.feasible);
  CHECK(ok.max_violation == 0.0);

  gp.ineq_constraints = {Posynomial{var("u", -1.0)}};
  auto bad = check_feasible(gp, {{"u", 0.5}}, 1e-9);
  CHECK_FALSE(bad.feasible);
  CHECK(bad.max_violation == doctest::Approx(1.0));
}

TEST_CASE("validation rejects undeclared variables") {
  GeoProgram gp;
  gp.variables = {{"u", 1e-6, 1e12, std::nullopt}};
  gp.objective = Posynomial{var("w")};
  CHECK_THROWS_AS(gp.validate(), std::invalid_argument);
}
