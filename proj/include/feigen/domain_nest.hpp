#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "feigen/dynamics.hpp"
#include "feigen/errors.hpp"
#include "feigen/statistics.hpp"

namespace feigen {

enum class Region { InsideU, InAnnulus, OutsideV };

struct LevelDomain {
  int n = 0;
  std::int64_t period = 1;  // P_n, so f_n = f^{P_n}
  double v_radius = 0.0;
  cplx closest_return;  // a_n = f^{P_n}(0)
  // When set, U^n is the disk of this radius instead of the one-step
  // pullback. Used by synthetic nests.
  std::optional<double> u_radius;
};

// Nested disks V^n around the critical point 0. U^n is approximated by
// {|z| < r_n, |f_n(z)| < r_n}, ignoring the connected-component condition.
template <typename Map>
class BasicDomainNest {
 public:
  BasicDomainNest(Map map, RenormSchedule schedule, double shape_factor, std::vector<LevelDomain> levels)
      : map_(std::move(map)), schedule_(std::move(schedule)), shape_factor_(shape_factor), levels_(std::move(levels)) {}

  const Map& map() const { return map_; }
  const RenormSchedule& schedule() const { return schedule_; }
  double shape_factor() const { return shape_factor_; }
  const std::vector<LevelDomain>& levels() const { return levels_; }
  int depth() const { return static_cast<int>(levels_.size()) - 1; }
  const LevelDomain& level(int n) const {
    if (n < 0 || n > depth()) throw PreconditionError("nest level out of range");
    return levels_[static_cast<std::size_t>(n)];
  }
  double radius(int n) const { return level(n).v_radius; }

  // f^{P_n}(z), or nullopt once the orbit leaves the escape disk.
  std::optional<cplx> return_map(int n, cplx z) const {
    const double R = map_.escape_radius();
    for (std::int64_t k = 0, P = level(n).period; k < P; ++k) {
      z = map_(z);
      if (!(std::abs(z) <= R)) return std::nullopt;
    }
    return z;
  }

  // Same, accumulating log|Df^{P_n}| into log_deriv.
  std::optional<cplx> return_map(int n, cplx z, double& log_deriv) const {
    const double R = map_.escape_radius();
    for (std::int64_t k = 0, P = level(n).period; k < P; ++k) {
      log_deriv += std::log(std::abs(map_.derivative(z)));
      z = map_(z);
      if (!(std::abs(z) <= R)) return std::nullopt;
    }
    return z;
  }

  bool in_v(int n, cplx z) const { return std::abs(z) < radius(n); }

  Region membership(int n, cplx z) const {
    const LevelDomain& L = level(n);
    if (!(std::abs(z) < L.v_radius)) return Region::OutsideV;
    if (L.u_radius) return std::abs(z) < *L.u_radius ? Region::InsideU : Region::InAnnulus;
    const auto w = return_map(n, z);
    return (w && std::abs(*w) < L.v_radius) ? Region::InsideU : Region::InAnnulus;
  }

 private:
  Map map_;
  RenormSchedule schedule_;
  double shape_factor_;
  std::vector<LevelDomain> levels_;
};

using DomainNest = BasicDomainNest<FamilyMap>;

// Levels 0..depth with r_n = |a_n| / shape_factor.
DomainNest build_nest(const FamilyMap& map, const RenormSchedule& schedule, int depth, double shape_factor = 0.5);

// Fraction of random points on the circle |z| = r_n whose forward f-orbit
// re-enters the open disk within `horizon` steps.
template <typename Map>
Estimate check_nice_property(const BasicDomainNest<Map>& nest, int n, std::int64_t boundary_samples,
                             std::int64_t horizon, std::uint64_t seed = 1);

}  // namespace feigen

#include "feigen/random.hpp"

namespace feigen {

template <typename Map>
Estimate check_nice_property(const BasicDomainNest<Map>& nest, int n, std::int64_t boundary_samples,
                             std::int64_t horizon, std::uint64_t seed) {
  if (boundary_samples < 100) throw PreconditionError("check_nice_property needs at least 100 boundary samples");
  const double r = nest.radius(n);
  const double R = nest.map().escape_radius();
  std::int64_t violations = 0;
  for (std::int64_t i = 0; i < boundary_samples; ++i) {
    const CounterKey key{seed, Stream::NiceBoundary, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(i), 0};
    cplx z = std::polar(r, 2.0 * std::numbers::pi * uniform01(key, 0));
    for (std::int64_t k = 0; k < horizon; ++k) {
      z = nest.map()(z);
      if (!(std::abs(z) <= R)) break;
      if (std::abs(z) < r * (1.0 - 1e-9)) {
        ++violations;
        break;
      }
    }
  }
  return wilson_estimate(violations, boundary_samples);
}

}  // namespace feigen
