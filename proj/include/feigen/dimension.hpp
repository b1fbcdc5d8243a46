#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "feigen/conformal_measure.hpp"
#include "feigen/dynamics.hpp"
#include "feigen/statistics.hpp"

namespace feigen {

struct Window {
  double x0 = 0.0, y0 = 0.0, side = 1.0;  // lower-left corner and side
};

struct PointSample {
  bool escaped = false;
  double distance = 0.0;  // distance estimate to J when escaped
};

using PointClassifier = std::function<PointSample(cplx)>;

// Escape test with a large bailout so the exterior distance estimate is
// usable; bounded orbits are recognised early by periodicity checking.
PointClassifier escape_classifier(const FamilyMap& map, std::int64_t escape_iters);

struct BoxCount {
  std::vector<double> grid_sizes;
  std::vector<std::int64_t> counts;
  double slope = 0.0;
  double stderr_ = 0.0;
  LinearFit fit;
  // classification at the finest resolution: 0 bounded, 128 boundary, 255 escaping
  int raster_width = 0;
  std::vector<std::uint8_t> raster;
};

// A cell of size eps is boundary when its subsamples contain both escaping
// and bounded points, or when an escaping subsample has distance estimate
// at most eps.
BoxCount box_dimension(const PointClassifier& classify, const Window& window, const std::vector<double>& resolutions,
                       int subsamples_per_cell, std::size_t workers = 1);

BoxCount box_dimension(const FamilyMap& map, const Window& window, const std::vector<double>& resolutions,
                       std::int64_t escape_iters, int subsamples_per_cell, std::size_t workers = 1);

struct ScalingFit {
  double sigma = 0.0;
  double stderr_ = 0.0;
  LinearFit fit;
  std::vector<double> radii;   // radii actually used
  std::vector<double> masses;
  int dropped = 0;  // radii with zero mass
};

// Slope of log mu(D_r) against log r.
ScalingFit scaling_exponent(const AtomicMeasure& mu, cplx center, const std::vector<double>& radii);

struct LogCorrectionFit {
  LinearFit fit;  // phi(r) = mu(D_r) / r^2 against log(1/r)
  bool consistent = false;  // positive slope with R^2 >= 0.9
  int dropped = 0;
};

LogCorrectionFit log_correction_fit(const AtomicMeasure& mu, cplx center, const std::vector<double>& radii);

// Halving radii from `largest` down to 4 times the cut radius.
std::vector<double> scaling_radii(const AtomicMeasure& mu, double largest);

}  // namespace feigen
