#pragma once

#include <cstdint>
#include <vector>

#include "feigen/dynamics.hpp"

namespace feigen {

struct Atom {
  cplx point;
  double weight = 0.0;  // normalized
  int depth = 0;
  std::int64_t parent = -1;  // index of f(point); -1 for the root 0
};

struct AtomicMeasure {
  std::vector<Atom> atoms;
  double delta = 0.0;
  double cut_radius = 0.0;
  int max_depth = 0;
  double normalizer = 0.0;  // the cut-off series at 0
  double total_mass = 0.0;
  std::int64_t skipped_critical = 0;  // preimages equal to the critical point
};

// Atoms at every zeta with f^n zeta = 0, n <= J, and |f^k zeta| >= r for
// k < n, weighted |Df^n(zeta)|^{-delta} and normalized.
AtomicMeasure build_cutoff_measure(const FamilyMap& map, double delta, double cut_radius, int max_depth);

// Mass of the closed disk.
double measure_of_disk(const AtomicMeasure& mu, cplx center, double radius);

struct Box {
  double x0, x1, y0, y1;
  bool contains(cplx z) const { return z.real() >= x0 && z.real() < x1 && z.imag() >= y0 && z.imag() < y1; }
  double distance_to(cplx z) const;
};

struct CovarianceReport {
  double max_residual = 0.0;
  std::int64_t boxes_checked = 0;
  std::int64_t skipped_near_zero = 0;  // box meets the disk of radius r at 0
  std::int64_t frontier_boxes = 0;  // boxes holding preimages of maximal-depth atoms
  std::int64_t contains_zero = 0;
};

// For each box X compares sum_{zeta in X} w(zeta) |Df(zeta)|^delta with the
// mass of f(X), read off as the atoms having a preimage in X. Atoms of
// maximal depth have no generated preimages and are left out of f(X).
CovarianceReport check_covariance(const AtomicMeasure& mu, const FamilyMap& map, double delta,
                                  const std::vector<Box>& boxes);

// Square tiling of [-extent, extent]^2 whose rows are centred on the real
// axis, so that real atoms never sit on an edge.
std::vector<Box> covariance_grid(double extent, double side);

}  // namespace feigen
