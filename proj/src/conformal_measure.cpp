#include "feigen/conformal_measure.hpp"

#include <cmath>

#include <fmt/format.h>

#include "feigen/errors.hpp"

namespace feigen {

AtomicMeasure build_cutoff_measure(const FamilyMap& map, double delta, double cut_radius, int max_depth) {
  if (!(cut_radius > 0.0)) throw PreconditionError("cut radius must be positive");
  if (max_depth < 0) throw PreconditionError("max depth must be nonnegative");
  if (map(cplx(0.0)) == cplx(0.0))
    throw DegenerateCriticalOrbitError("the critical point is fixed, so its preimage tree degenerates");

  AtomicMeasure mu;
  mu.delta = delta;
  mu.cut_radius = cut_radius;
  mu.max_depth = max_depth;
  std::vector<double> log_deriv{0.0};
  mu.atoms.push_back(Atom{cplx(0.0), 0.0, 0, -1});
  // breadth-first so atoms come out grouped by depth
  std::size_t begin = 0;
  for (int n = 1; n <= max_depth; ++n) {
    const std::size_t end = mu.atoms.size();
    for (std::size_t i = begin; i < end; ++i) {
      for (cplx p : preimages(map, mu.atoms[i].point)) {
        if (std::abs(p) < cut_radius) continue;
        const double dp = std::abs(map.derivative(p));
        if (dp == 0.0) {
          ++mu.skipped_critical;
          continue;
        }
        mu.atoms.push_back(Atom{p, 0.0, n, static_cast<std::int64_t>(i)});
        log_deriv.push_back(log_deriv[i] + std::log(dp));
      }
    }
    begin = end;
  }
  for (std::size_t i = 0; i < mu.atoms.size(); ++i) {
    mu.atoms[i].weight = std::exp(-delta * log_deriv[i]);
    mu.normalizer += mu.atoms[i].weight;
  }
  if (!(mu.normalizer > 0.0) || !std::isfinite(mu.normalizer)) throw EmptyMeasureError("cut-off series is not positive");
  for (auto& a : mu.atoms) {
    a.weight /= mu.normalizer;
    mu.total_mass += a.weight;
  }
  return mu;
}

double measure_of_disk(const AtomicMeasure& mu, cplx center, double radius) {
  if (radius < 0.0) throw PreconditionError("radius must be nonnegative");
  double mass = 0.0;
  for (const auto& a : mu.atoms)
    if (std::abs(a.point - center) <= radius) mass += a.weight;
  return mass;
}

double Box::distance_to(cplx z) const {
  const double dx = std::max({x0 - z.real(), 0.0, z.real() - x1});
  const double dy = std::max({y0 - z.imag(), 0.0, z.imag() - y1});
  return std::hypot(dx, dy);
}

CovarianceReport check_covariance(const AtomicMeasure& mu, const FamilyMap& map, double delta,
                                  const std::vector<Box>& boxes) {
  CovarianceReport rep;
  for (const Box& X : boxes) {
    if (X.contains(cplx(0.0))) {
      ++rep.contains_zero;
      continue;
    }
    if (X.distance_to(cplx(0.0)) < mu.cut_radius) {
      ++rep.skipped_near_zero;
      continue;
    }
    double lhs = 0.0;
    for (const auto& a : mu.atoms)
      if (a.depth > 0 && X.contains(a.point)) lhs += a.weight * std::pow(std::abs(map.derivative(a.point)), delta);
    double rhs = 0.0;
    bool frontier = false;
    for (const auto& a : mu.atoms) {
      bool hit = false;
      for (cplx p : preimages(map, a.point)) hit = hit || X.contains(p);
      if (!hit) continue;
      // preimages of maximal-depth atoms were never generated
      if (a.depth == mu.max_depth) frontier = true;
      else rhs += a.weight;
    }
    if (frontier) ++rep.frontier_boxes;
    ++rep.boxes_checked;
    rep.max_residual = std::max(rep.max_residual, std::abs(lhs - rhs));
  }
  return rep;
}

std::vector<Box> covariance_grid(double extent, double side) {
  if (!(side > 0.0) || !(extent > 0.0)) throw PreconditionError("grid extent and side must be positive");
  const int half = static_cast<int>(std::ceil(extent / side));
  // an irrational horizontal offset keeps dyadic and algebraic atoms off the edges
  const double shift = side * (std::sqrt(2.0) - 1.0) / 3.0;
  std::vector<Box> boxes;
  for (int i = -half - 1; i <= half; ++i)
    for (int j = -half; j <= half; ++j) {
      const double x0 = i * side + shift;
      const double y0 = (j - 0.5) * side;
      boxes.push_back(Box{x0, x0 + side, y0, y0 + side});
    }
  return boxes;
}

}  // namespace feigen
