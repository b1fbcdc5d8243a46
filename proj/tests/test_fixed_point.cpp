#include <doctest.h>

#include <cmath>
#include <numbers>

#include "feigen/errors.hpp"
#include "feigen/fixed_point.hpp"

using namespace feigen;

namespace {

// One-unknown truncation g(x) = 1 + a x^2 collocated at cos(pi/4),
// solved by bisection.
double order_two_oracle() {
  const double x = std::cos(std::numbers::pi / 4.0);
  auto F = [x](double a) {
    auto g = [a](double t) { return 1.0 + a * t * t; };
    const double alpha = 1.0 + a;
    return g(x) - g(g(alpha * x)) / alpha;
  };
  double lo = -1.45, hi = -1.30;
  REQUIRE(F(lo) * F(hi) < 0.0);
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    if ((F(mid) < 0.0) == (F(lo) < 0.0)) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("order two truncation matches the scalar oracle") {
  const auto sol = solve_cvitanovic(2, 2, 1.0);
  REQUIRE(sol.coeffs.size() == 1);
  CHECK(sol.coeffs[0] == doctest::Approx(order_two_oracle()).epsilon(1e-10));
  CHECK(sol.alpha == doctest::Approx(1.0 + sol.coeffs[0]).epsilon(1e-15));
  CHECK(sol.residual > 0.0);
  CHECK(sol.residual == doctest::Approx(fixed_point_residual(sol)));
  CHECK_THROWS_AS(solve_cvitanovic(2, 2, 1e-10), ConvergenceError);
}

TEST_CASE("quadratic fixed point") {
  const auto s20 = solve_cvitanovic(2, 20, 1e-10);
  const auto s30 = solve_cvitanovic(2, 30, 1e-10);
  CHECK(s20.residual <= 1e-10);
  CHECK(fixed_point_residual(s20) <= 1e-10);
  CHECK(std::abs(s20.alpha) == doctest::Approx(0.3995).epsilon(1e-4));
  CHECK(std::abs(s20.alpha - s30.alpha) <= 1e-8);
  // truncation stability, 100 tol
  CHECK(std::abs(s20.alpha - s30.alpha) <= 100 * 1e-10);
  // g(0) = 1, alpha = g(1), evenness, criticality
  CHECK(s20.evaluate(0.0) == 1.0);
  CHECK(s20.evaluate(1.0) == doctest::Approx(s20.alpha).epsilon(1e-15));
  for (double x : {0.1, 0.37, 0.8, 1.0}) CHECK(s20.evaluate(x) == s20.evaluate(-x));
  CHECK(s20.derivative(0.0) == 0.0);
  CHECK(s20.coeffs[0] != 0.0);
  // Feigenbaum's alpha, 2.502907875...
  CHECK(1.0 / std::abs(s20.alpha) == doctest::Approx(2.502907875095892).epsilon(1e-9));
}

TEST_CASE("higher degrees") {
  const auto s4 = solve_cvitanovic(4, 20, 1e-10);
  CHECK(s4.residual <= 1e-10);
  CHECK(std::abs(s4.alpha) > std::abs(solve_cvitanovic(2, 20, 1e-10).alpha));
  CHECK(std::abs(s4.alpha) < 1.0);
  CHECK(s4.evaluate(0.5) == doctest::Approx(s4.evaluate(-0.5)));
}

TEST_CASE("tower evaluation") {
  const auto sol = solve_cvitanovic(2, 20, 1e-10);
  CHECK(tower_eval(sol, 0, 0.0) == cplx(1.0, 0.0));
  for (int m = 0; m < 6; ++m) {
    CHECK(std::abs(tower_eval(sol, m, 0.0) - std::pow(sol.alpha, -m)) <= 1e-12 * std::pow(std::abs(sol.alpha), -m));
  }
  for (int m = 0; m < 5; ++m) {
    for (double t : {-0.9, -0.3, 0.2, 0.75}) {
      const cplx z(t, 0.1 * t);
      const cplx lhs = tower_eval(sol, m + 1, z);
      const cplx rhs = tower_eval(sol, m, sol.alpha * z) / sol.alpha;
      CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
    }
  }
  // renormalization: f_0 = f_1 o f_1 up to the truncation residual
  for (double x : {-1.0, -0.5, 0.0, 0.3, 0.9}) {
    const cplx once = tower_eval(sol, 1, x);
    CHECK(std::abs(tower_eval(sol, 1, once) - tower_eval(sol, 0, x)) <= 1e-12);
  }
  CHECK_THROWS_AS(tower_eval(sol, 0, 2.0), DomainError);
  CHECK_THROWS_AS(tower_eval(sol, -1, 0.0), PreconditionError);
}

TEST_CASE("preconditions") {
  CHECK_THROWS_AS(solve_cvitanovic(2, 1, 1e-10), PreconditionError);
  CHECK_THROWS_AS(solve_cvitanovic(2, 10, 0.0), PreconditionError);
  CHECK_THROWS_AS(solve_cvitanovic(3, 10, 1e-10), PreconditionError);
}
