#include "feigen/domain_nest.hpp"

#include <fmt/format.h>

namespace feigen {

DomainNest build_nest(const FamilyMap& map, const RenormSchedule& schedule, int depth, double shape_factor) {
  if (!(shape_factor > 0.0 && shape_factor <= 1.0))
    throw PreconditionError(fmt::format("shape factor must lie in (0, 1], got {}", shape_factor));
  if (depth < 0) throw PreconditionError("nest depth must be nonnegative");

  const double R = map.escape_radius();
  std::vector<LevelDomain> levels;
  cplx z = 0.0;
  std::int64_t done = 0;
  for (int n = 0; n <= depth; ++n) {
    const std::int64_t P = schedule.cumulative(n);
    for (; done < P; ++done) {
      z = map(z);
      if (!(std::abs(z) <= R))
        throw NonRenormalizableError(fmt::format("critical orbit escapes after {} steps", done + 1));
    }
    if (std::abs(z) < 1e-13)
      throw DegenerateScaleError(fmt::format("closest return at level {} is {:.3e}; the critical point is (nearly) periodic", n, std::abs(z)));
    LevelDomain L;
    L.n = n;
    L.period = P;
    L.closest_return = z;
    L.v_radius = std::abs(z) / shape_factor;
    if (!levels.empty() && !(L.v_radius < levels.back().v_radius))
      throw NonRenormalizableError(fmt::format("closest returns stop shrinking at level {}", n));
    levels.push_back(L);
  }
  return DomainNest(map, schedule, shape_factor, std::move(levels));
}

}  // namespace feigen
