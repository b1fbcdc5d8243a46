#include "feigen/statistics.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numeric>

#include "feigen/errors.hpp"

namespace feigen {

Estimate wilson_estimate(std::int64_t successes, std::int64_t trials, double z) {
  if (trials <= 0) throw EmptySampleError("wilson_estimate: no trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double spread = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  Estimate e;
  e.value = p;
  e.ci_low = std::max(0.0, std::min(p, centre - spread));
  e.ci_high = std::min(1.0, std::max(p, centre + spread));
  e.n_samples = trials;
  return e;
}

Estimate mean_estimate(std::span<const double> values, double z) {
  if (values.empty()) throw EmptySampleError("mean_estimate: no values");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  const double hw = z * sd / std::sqrt(n);
  return Estimate{mean, mean - hw, mean + hw, static_cast<std::int64_t>(values.size())};
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw PreconditionError("fit_line: size mismatch");
  const auto n = static_cast<Eigen::Index>(x.size());
  if (n < 2) throw InsufficientDataError("fit_line: need at least two points");

  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = x[static_cast<std::size_t>(i)];
    rhs(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector2d beta = design.colPivHouseholderQr().solve(rhs);

  LinearFit fit;
  fit.intercept = beta(0);
  fit.slope = beta(1);
  fit.points = n;

  const Eigen::VectorXd residual = rhs - design * beta;
  const double ss_res = residual.squaredNorm();
  const double ss_tot = (rhs.array() - rhs.mean()).square().sum();
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;

  const double sxx = (design.col(1).array() - design.col(1).mean()).square().sum();
  if (n > 2 && sxx > 0.0) fit.slope_stderr = std::sqrt(ss_res / static_cast<double>(n - 2) / sxx);
  return fit;
}

}  // namespace feigen
