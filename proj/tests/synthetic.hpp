#pragma once

#include <vector>

#include "feigen/domain_nest.hpp"

namespace testing_support {

using feigen::cplx;

// z -> s z, with derivative s everywhere.
struct LinearMap {
  double s = 0.5;
  double escape_radius() const { return 1e6; }
  cplx operator()(cplx z) const { return s * z; }
  cplx derivative(cplx) const { return s; }
};

struct SquareMap {
  double escape_radius() const { return 2.0; }
  cplx operator()(cplx z) const { return z * z; }
  cplx derivative(cplx z) const { return 2.0 * z; }
};

// Levels with V radius v[n] and U radius u[n], all of period 1.
template <typename Map>
feigen::BasicDomainNest<Map> disk_nest(Map map, const std::vector<double>& v, const std::vector<double>& u) {
  std::vector<feigen::LevelDomain> levels;
  for (std::size_t n = 0; n < v.size(); ++n) {
    feigen::LevelDomain L;
    L.n = static_cast<int>(n);
    L.period = 1;
    L.v_radius = v[n];
    L.closest_return = 0.0;
    L.u_radius = u[n];
    levels.push_back(L);
  }
  return feigen::BasicDomainNest<Map>(map, feigen::RenormSchedule(std::vector<int>(v.size(), 2)), 1.0, levels);
}

}  // namespace testing_support
