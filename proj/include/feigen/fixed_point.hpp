#pragma once

#include <complex>
#include <vector>

#include "feigen/dynamics.hpp"

namespace feigen {

// g(z) = 1 + sum_i a_i z^{d i}, solving g(z) = g(g(alpha z)) / alpha with
// alpha = g(1).
struct FixedPointSolution {
  int degree = 2;
  int order = 0;  // number of terms including the constant
  double alpha = 0.0;
  std::vector<double> coeffs;  // a_1 .. a_{order-1}
  double residual = 0.0;
  int newton_steps = 0;

  template <typename Scalar>
  Scalar evaluate(Scalar z) const {
    const Scalar y = z * z;
    const Scalar step = ipow(y, degree / 2);
    Scalar power = step;
    Scalar sum(1.0);
    for (double a : coeffs) {
      sum += a * power;
      power *= step;
    }
    return sum;
  }

  double derivative(double x) const;
};

// Newton collocation with an analytic Jacobian. Degrees above 2 are reached
// by continuation in the exponent starting from the quadratic solution.
FixedPointSolution solve_cvitanovic(int degree, int order, double tol);

// Sup-norm of the functional equation residual on cos(pi k / (4 order)).
double fixed_point_residual(const FixedPointSolution& sol);

// alpha^{-m} g(alpha^m z); requires |alpha^m z| <= 1.
cplx tower_eval(const FixedPointSolution& sol, int m, cplx z);

}  // namespace feigen
