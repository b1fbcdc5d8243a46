#include "feigen/dynamics.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "feigen/errors.hpp"

namespace feigen {

FamilyMap::FamilyMap(cplx c_, int d_, MapKind kind_) : c(c_), d(d_), kind(kind_) {
  if (d < 2 || d % 2 != 0) throw PreconditionError(fmt::format("degree must be even and >= 2, got {}", d));
  if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) throw PreconditionError("parameter must be finite");
  if (kind == MapKind::Real && c.imag() != 0.0) throw PreconditionError("real map needs a real parameter");
}

double FamilyMap::escape_radius() const {
  return std::max(2.0, 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * std::abs(c))));
}

OrbitResult iterate_orbit(const FamilyMap& map, cplx z0, std::int64_t n, bool track_derivative,
                          EscapePolicy policy) {
  if (n < 0) throw PreconditionError("iterate_orbit: n must be nonnegative");
  if (!std::isfinite(z0.real()) || !std::isfinite(z0.imag())) throw PreconditionError("iterate_orbit: z0 not finite");
  const double R = map.escape_radius();
  const double logd = std::log(static_cast<double>(map.d));
  OrbitResult out;
  cplx z = z0;
  for (std::int64_t k = 0; k < n; ++k) {
    if (track_derivative) out.log_deriv_modulus += logd + (map.d - 1) * std::log(std::abs(z));
    z = map(z);
    out.steps_taken = k + 1;
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw OverflowError(fmt::format("orbit overflowed after {} steps", k + 1));
    if (!out.escape_time && std::abs(z) > R) {
      out.escape_time = k + 1;
      if (policy == EscapePolicy::Stop) break;
    }
  }
  out.final_point = z;
  return out;
}

double log_abs_derivative(const FamilyMap& map, cplx z, std::int64_t n) {
  return iterate_orbit(map, z, n, true, EscapePolicy::Continue).log_deriv_modulus;
}

std::vector<cplx> preimages(const FamilyMap& map, cplx w) {
  const cplx t = w - map.c;
  if (t == cplx(0.0, 0.0)) return {cplx(0.0, 0.0)};
  if (map.d == 2) {
    const cplx s = std::sqrt(t);
    return {s, -s};
  }
  const double r = std::pow(std::abs(t), 1.0 / map.d);
  const double theta = std::arg(t) / map.d;
  std::vector<cplx> out;
  out.reserve(static_cast<std::size_t>(map.d));
  for (int k = 0; k < map.d; ++k) out.push_back(std::polar(r, theta + 2.0 * std::numbers::pi * k / map.d));
  return out;
}

RenormSchedule::RenormSchedule(std::vector<int> p) : periods(std::move(p)) {
  for (int q : periods)
    if (q < 2) throw PreconditionError("relative periods must be >= 2");
}

RenormSchedule RenormSchedule::doubling(int depth) {
  return RenormSchedule(std::vector<int>(static_cast<std::size_t>(std::max(depth, 0)), 2));
}

std::int64_t RenormSchedule::cumulative(int n) const {
  if (n < 0) throw PreconditionError("schedule level must be nonnegative");
  std::int64_t P = 1;
  for (int k = 0; k < n; ++k) {
    // levels beyond the stored schedule repeat the last period
    const int q = periods.empty() ? 2 : periods[static_cast<std::size_t>(std::min<int>(k, depth() - 1))];
    P *= q;
  }
  return P;
}

double critical_orbit_real(int d, double c, std::int64_t period) {
  double x = 0.0;
  for (std::int64_t k = 0; k < period; ++k) {
    x = (d == 2 ? x * x : ipow(x, d)) + c;
    if (!std::isfinite(x) || std::abs(x) > 1e150) return x > 0 ? HUGE_VAL : -HUGE_VAL;
  }
  return x;
}

double find_superstable(int d, std::int64_t period, double lo, double hi) {
  if (period < 1) throw PreconditionError("period must be positive");
  if (lo > hi) std::swap(lo, hi);
  double flo = critical_orbit_real(d, lo, period);
  const double fhi = critical_orbit_real(d, hi, period);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0))
    throw BracketError(fmt::format("no sign change of the period-{} critical orbit on [{}, {}]", period, lo, hi));
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = critical_orbit_real(d, mid, period);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {

void check_degree(int d) {
  if (d < 2 || d % 2 != 0) throw PreconditionError("degree must be even and >= 2");
}

// Appends the superstable parameter of the next doubled period.
void push_next_superstable(int d, std::vector<double>& superstable) {
  const auto k = superstable.size();
  const double ck = superstable[k - 1];
  const double gap = superstable[k - 2] - ck;
  const std::int64_t period = std::int64_t{1} << k;
  // walk left from c_k to the first sign change of the doubled-period orbit
  const double step = gap / 200.0;
  double right = ck - 1e-3 * gap;
  const bool sign_right = critical_orbit_real(d, right, period) > 0;
  for (int s = 0; s < 4000; ++s) {
    const double left = right - step;
    if ((critical_orbit_real(d, left, period) > 0) != sign_right) {
      superstable.push_back(find_superstable(d, period, left, right));
      return;
    }
    right = left;
  }
  throw ConvergenceError(fmt::format("lost the period-{} superstable parameter", period));
}

// Geometric tail from the last three superstable parameters.
double extrapolate(const std::vector<double>& s) {
  const auto k = s.size();
  const double gap = s[k - 2] - s[k - 1];
  const double ratio = (s[k - 3] - s[k - 2]) / gap;
  return ratio > 1.0 ? s[k - 1] - gap / (ratio - 1.0) : s[k - 1];
}

}  // namespace

DoublingLimit find_doubling_limit(int d, double tol, int max_levels) {
  if (!(tol > 0.0)) throw PreconditionError("tol must be positive");
  check_degree(d);
  DoublingLimit out;
  out.superstable = {0.0, -1.0};
  for (int level = 2; level <= max_levels; ++level) {
    const auto k = out.superstable.size();
    if (out.superstable[k - 2] - out.superstable[k - 1] < tol && k >= 4) {
      out.c = extrapolate(out.superstable);
      return out;
    }
    push_next_superstable(d, out.superstable);
  }
  throw ConvergenceError(fmt::format("doubling cascade not resolved to {} within {} levels", tol, max_levels));
}

DoublingLimit doubling_limit_at_depth(int d, int levels) {
  check_degree(d);
  if (levels < 4) throw PreconditionError("need at least 4 superstable parameters");
  DoublingLimit out;
  out.superstable = {0.0, -1.0};
  while (static_cast<int>(out.superstable.size()) < levels) push_next_superstable(d, out.superstable);
  out.c = extrapolate(out.superstable);
  return out;
}

}  // namespace feigen
