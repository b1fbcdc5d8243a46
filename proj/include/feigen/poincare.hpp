#pragma once

#include <cstdint>
#include <vector>

#include "feigen/domain_nest.hpp"
#include "feigen/statistics.hpp"

namespace feigen {

struct SeriesAccount {
  double delta = 0.0;
  cplx base_point;
  int depth = 0;
  std::vector<double> partial_sums;  // S_0 = 1, S_j = S_{j-1} + level_mass[j]
  std::vector<double> level_mass;    // sum over f^j zeta = z of |Df^j(zeta)|^{-delta}
  double pruned_mass_bound = 0.0;
  std::int64_t nodes_visited = 0;
};

// Depth-first preimage tree of z. Branches whose running weight falls below
// prune_eps are dropped; their possible descendants are bounded using the
// largest per-level growth seen among kept branches.
SeriesAccount poincare_partial_sums(const FamilyMap& map, cplx z, double delta, int depth, double prune_eps = 0.0,
                                    std::size_t workers = 1);

// Oracle for f(z) = z^2: sum_{n<=J} (2^{1-delta})^n r^{-delta (1 - 2^{-n})}.
double closed_form_c0(double r, double delta, int depth);

enum class SeriesVerdict { Converging, Diverging, Undecided };

const char* to_string(SeriesVerdict v);

struct DivergenceDiagnostic {
  SeriesVerdict verdict = SeriesVerdict::Undecided;
  double growth = 1.0;  // fitted per-level factor of the level masses
  LinearFit fit;
};

// Log-linear fit of the level masses over the last half of levels.
DivergenceDiagnostic divergence_diagnostic(const SeriesAccount& account, double eps_slope = 0.02);

struct DeltaBracket {
  double low = 0.0;   // largest Diverging delta
  double high = 0.0;  // smallest Converging delta
  bool low_is_grid_floor = false;
  bool high_is_grid_ceiling = false;
  std::vector<std::pair<double, SeriesVerdict>> verdicts;
};

DeltaBracket bound_delta_cr(const FamilyMap& map, cplx z, int depth, const std::vector<double>& delta_grid,
                            double prune_eps = 0.0, std::size_t workers = 1);

struct OmegaEstimate {
  Estimate omega;
  double spread = 1.0;  // max/min of the per-sample series
  std::int64_t resampled = 0;
};

// Average of the truncated series of f_m over uniform points of A^n.
OmegaEstimate estimate_omega(const DomainNest& nest, int m, int n, double delta, std::int64_t annulus_samples,
                             int depth, double prune_eps, std::uint64_t seed, std::size_t workers = 1);

}  // namespace feigen
