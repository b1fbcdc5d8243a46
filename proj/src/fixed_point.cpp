#include "feigen/fixed_point.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "feigen/errors.hpp"

namespace feigen {

namespace {

// Series in a real half-exponent e, so that the degree can vary continuously:
// g(x) = 1 + sum_i a_i (x^2)^{e i}.
struct RealSeries {
  double e;
  const Eigen::VectorXd& a;

  double term(double x, int i) const {
    const double y = x * x;
    return y == 0.0 ? 0.0 : std::pow(y, e * i);
  }
  double value(double x) const {
    double s = 1.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) s += a(i) * term(x, static_cast<int>(i) + 1);
    return s;
  }
  double slope(double x) const {
    const double y = x * x;
    if (y == 0.0) return 0.0;
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      const double k = e * static_cast<double>(i + 1);
      s += a(i) * 2.0 * k * x * std::pow(y, k - 1.0);
    }
    return s;
  }
};

double sup_residual(double e, const Eigen::VectorXd& a, int order) {
  RealSeries g{e, a};
  const double alpha = g.value(1.0);
  double worst = 0.0;
  const int points = 4 * order;
  for (int k = 0; k <= points; ++k) {
    const double x = std::cos(std::numbers::pi * k / points);
    const double r = g.value(x) - g.value(g.value(alpha * x)) / alpha;
    worst = std::max(worst, std::isfinite(r) ? std::abs(r) : HUGE_VAL);
  }
  return worst;
}

struct NewtonOutcome {
  double residual;
  int steps;
};

// Runs to convergence of the collocation equations, independent of the
// caller's tolerance.
NewtonOutcome newton(double e, Eigen::VectorXd& a, int order) {
  const Eigen::Index n = a.size();
  Eigen::VectorXd nodes(n);
  for (Eigen::Index j = 0; j < n; ++j)
    nodes(j) = std::cos((2.0 * static_cast<double>(j + 1) - 1.0) * std::numbers::pi / (4.0 * static_cast<double>(n)));

  double sup = sup_residual(e, a, order);
  double best_f = HUGE_VAL;
  int stalled = 0;
  int steps = 0;
  Eigen::VectorXd F(n);
  Eigen::MatrixXd J(n, n);
  while (steps < 200) {
    ++steps;
    RealSeries g{e, a};
    const double alpha = g.value(1.0);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double x = nodes(j);
      const double u = alpha * x;
      const double v = g.value(u);
      const double w = g.value(v);
      F(j) = g.value(x) - w / alpha;
      const double gu = g.slope(u);
      const double gv = g.slope(v);
      for (Eigen::Index k = 0; k < n; ++k) {
        const int i = static_cast<int>(k) + 1;
        const double dv = g.term(u, i) + gu * x;
        const double dw = g.term(v, i) + gv * dv;
        J(j, k) = g.term(x, i) - (dw / alpha - w / (alpha * alpha));
      }
    }
    if (!J.allFinite() || !F.allFinite()) throw SingularError("fixed point Jacobian is not finite");
    const double fnorm = F.lpNorm<Eigen::Infinity>();
    if (fnorm < best_f) {
      best_f = fnorm;
      stalled = 0;
    } else if (++stalled >= 10) {
      break;
    }
    if (fnorm <= 1e-16) break;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(J);
    if (cod.rank() == 0) throw SingularError("fixed point Jacobian is singular");
    const Eigen::VectorXd delta = cod.solve(F);
    a -= delta;
    sup = sup_residual(e, a, order);
    if (!std::isfinite(sup)) throw ConvergenceError("Newton iteration diverged");
    if (delta.lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + a.lpNorm<Eigen::Infinity>())) break;
  }
  const double best = sup;
  return {best, steps};
}

}  // namespace

double FixedPointSolution::derivative(double x) const {
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(coeffs.data(), static_cast<Eigen::Index>(coeffs.size()));
  return RealSeries{degree / 2.0, a}.slope(x);
}

FixedPointSolution solve_cvitanovic(int degree, int order, double tol) {
  if (order < 2) throw PreconditionError("order must be at least 2");
  if (!(tol > 0.0)) throw PreconditionError("tol must be positive");
  if (degree < 2 || degree % 2 != 0) throw PreconditionError("degree must be even and >= 2");

  Eigen::VectorXd a = Eigen::VectorXd::Zero(order - 1);
  a(0) = -1.5;
  int steps = 0;
  // exponent continuation d = 2, 2.25, ..., degree
  for (double d = 2.0; d < degree; d += 0.25) steps += newton(d / 2.0, a, order).steps;
  const NewtonOutcome last = newton(degree / 2.0, a, order);
  steps += last.steps;

  FixedPointSolution sol;
  sol.degree = degree;
  sol.order = order;
  sol.coeffs.assign(a.data(), a.data() + a.size());
  sol.alpha = sol.evaluate(1.0);
  sol.residual = last.residual;
  sol.newton_steps = steps;
  if (!(sol.residual <= tol))
    throw ConvergenceError(fmt::format("residual {:.3e} stalled above tolerance {:.3e}", sol.residual, tol));
  if (!(std::abs(sol.alpha) > 0.0 && std::abs(sol.alpha) < 1.0))
    throw ConvergenceError(fmt::format("converged to a spurious branch with alpha = {}", sol.alpha));
  return sol;
}

double fixed_point_residual(const FixedPointSolution& sol) {
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(sol.coeffs.data(), static_cast<Eigen::Index>(sol.coeffs.size()));
  return sup_residual(sol.degree / 2.0, a, sol.order);
}

cplx tower_eval(const FixedPointSolution& sol, int m, cplx z) {
  if (m < 0) throw PreconditionError("tower level must be nonnegative");
  double scale = 1.0;
  for (int k = 0; k < m; ++k) scale *= sol.alpha;
  const cplx w = scale * z;
  if (std::abs(w) > 1.0 + 1e-12)
    throw DomainError(fmt::format("|alpha^{} z| = {} lies outside the unit disk", m, std::abs(w)));
  return sol.evaluate(w) / scale;
}

}  // namespace feigen
