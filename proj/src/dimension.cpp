#include "feigen/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "feigen/errors.hpp"
#include "feigen/parallel.hpp"

namespace feigen {

PointClassifier escape_classifier(const FamilyMap& map, std::int64_t escape_iters) {
  if (escape_iters < 1000) throw PreconditionError("escape horizon must be at least 1000");
  return [map, escape_iters](cplx z) {
    constexpr double bailout = 1e6;
    cplx dz(1.0, 0.0);
    cplx saved = z;
    std::int64_t check = 8;
    for (std::int64_t k = 0; k < escape_iters; ++k) {
      dz = map.derivative(z) * dz;
      z = map(z);
      const double r = std::abs(z);
      if (r > bailout) {
        const double adz = std::abs(dz);
        const double de = adz > 0.0 ? 0.5 * r * std::log(r) / adz : 0.0;
        return PointSample{true, de};
      }
      if (std::abs(z - saved) < 1e-14) return PointSample{false, 0.0};
      if (k + 1 == check) {
        saved = z;
        check *= 2;
      }
    }
    return PointSample{false, 0.0};
  };
}

namespace {

struct CellTally {
  bool any_escaped = false;
  bool any_bounded = false;
  double min_de = std::numeric_limits<double>::infinity();

  bool boundary(double eps) const { return (any_escaped && any_bounded) || min_de <= eps; }
};

std::int64_t cells_per_side(const Window& w, double eps) {
  const double k = w.side / eps;
  const auto n = static_cast<std::int64_t>(std::llround(k));
  if (n < 1 || std::abs(k - static_cast<double>(n)) > 1e-9 * k)
    throw PreconditionError(fmt::format("resolution {} does not tile a window of side {}", eps, w.side));
  return n;
}

}  // namespace

BoxCount box_dimension(const PointClassifier& classify, const Window& window, const std::vector<double>& resolutions,
                       int subsamples_per_cell, std::size_t workers) {
  if (resolutions.size() < 2) throw InsufficientDataError("box counting needs at least two resolutions");
  for (std::size_t i = 1; i < resolutions.size(); ++i)
    if (!(resolutions[i] < resolutions[i - 1])) throw PreconditionError("resolutions must be decreasing");
  if (subsamples_per_cell < 1) throw PreconditionError("need at least one subsample per cell");

  const int s = subsamples_per_cell;
  BoxCount out;
  std::vector<double> x, y;
  for (double eps : resolutions) {
    const std::int64_t n = cells_per_side(window, eps);
    const double h = window.side / static_cast<double>(n * s);
    std::vector<std::uint8_t> flag(static_cast<std::size_t>(n * n), 0);
    parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t row) {
      for (std::int64_t col = 0; col < n; ++col) {
        CellTally t;
        for (int a = 0; a < s; ++a)
          for (int b = 0; b < s; ++b) {
            const cplx z(window.x0 + (static_cast<double>(col * s + b) + 0.5) * h,
                         window.y0 + (static_cast<double>(static_cast<std::int64_t>(row) * s + a) + 0.5) * h);
            const PointSample p = classify(z);
            if (p.escaped) {
              t.any_escaped = true;
              t.min_de = std::min(t.min_de, p.distance);
            } else {
              t.any_bounded = true;
            }
          }
        flag[row * static_cast<std::size_t>(n) + static_cast<std::size_t>(col)] =
            t.boundary(eps) ? 128 : (t.any_escaped ? 255 : 0);
      }
    });
    const auto count = static_cast<std::int64_t>(std::count(flag.begin(), flag.end(), 128));
    out.grid_sizes.push_back(eps);
    out.counts.push_back(count);
    if (count > 0) {
      x.push_back(std::log(1.0 / eps));
      y.push_back(std::log(static_cast<double>(count)));
    }
    out.raster_width = static_cast<int>(n);
    out.raster = std::move(flag);
  }
  if (x.empty()) throw EmptySetError("no boundary cell at any resolution; the window misses J");
  if (x.size() < 2) throw InsufficientDataError("boundary cells found at fewer than two resolutions");
  out.fit = fit_line(x, y);
  out.slope = out.fit.slope;
  out.stderr_ = out.fit.slope_stderr;
  return out;
}

BoxCount box_dimension(const FamilyMap& map, const Window& window, const std::vector<double>& resolutions,
                       std::int64_t escape_iters, int subsamples_per_cell, std::size_t workers) {
  return box_dimension(escape_classifier(map, escape_iters), window, resolutions, subsamples_per_cell, workers);
}

namespace {

void check_radii(const std::vector<double>& radii) {
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw PreconditionError("radii must be positive");
    if (i > 0 && !(radii[i] < radii[i - 1])) throw PreconditionError("radii must be decreasing");
  }
}

}  // namespace

ScalingFit scaling_exponent(const AtomicMeasure& mu, cplx center, const std::vector<double>& radii) {
  check_radii(radii);
  ScalingFit out;
  std::vector<double> x, y;
  for (double r : radii) {
    const double mass = measure_of_disk(mu, center, r);
    if (mass <= 0.0) {
      ++out.dropped;
      continue;
    }
    out.radii.push_back(r);
    out.masses.push_back(mass);
    x.push_back(std::log(r));
    y.push_back(std::log(mass));
  }
  if (x.size() < 4) throw InsufficientDataError(fmt::format("only {} radii carry mass; need 4", x.size()));
  out.fit = fit_line(x, y);
  out.sigma = out.fit.slope;
  out.stderr_ = out.fit.slope_stderr;
  return out;
}

LogCorrectionFit log_correction_fit(const AtomicMeasure& mu, cplx center, const std::vector<double>& radii) {
  check_radii(radii);
  LogCorrectionFit out;
  std::vector<double> x, y;
  for (double r : radii) {
    const double mass = measure_of_disk(mu, center, r);
    if (mass <= 0.0) {
      ++out.dropped;
      continue;
    }
    x.push_back(std::log(1.0 / r));
    y.push_back(mass / (r * r));
  }
  if (x.size() < 4) throw InsufficientDataError(fmt::format("only {} radii carry mass; need 4", x.size()));
  out.fit = fit_line(x, y);
  out.consistent = out.fit.slope > 0.0 && out.fit.r_squared >= 0.9;
  return out;
}

std::vector<double> scaling_radii(const AtomicMeasure& mu, double largest) {
  const double floor = 4.0 * mu.cut_radius;
  std::vector<double> radii;
  for (double r = largest; r >= floor; r *= 0.5) radii.push_back(r);
  return radii;
}

}  // namespace feigen
