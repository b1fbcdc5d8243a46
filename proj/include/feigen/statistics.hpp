#pragma once

#include <cstdint>
#include <span>

namespace feigen {

// A Monte Carlo or fitted value with a 95% interval.
struct Estimate {
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::int64_t n_samples = 0;

  double half_width() const { return 0.5 * (ci_high - ci_low); }
};

inline constexpr double kZ95 = 1.959963984540054;

// Binomial proportion with a Wilson score interval.
Estimate wilson_estimate(std::int64_t successes, std::int64_t trials, double z = kZ95);

// Sample mean with a normal-approximation interval.
Estimate mean_estimate(std::span<const double> values, double z = kZ95);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_stderr = 0.0;
  std::int64_t points = 0;
};

// Ordinary least squares y = intercept + slope * x. Needs at least two
// distinct abscissae; with exactly two points the fit is exact.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace feigen
