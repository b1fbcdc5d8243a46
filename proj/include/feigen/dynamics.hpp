#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

namespace feigen {

using cplx = std::complex<double>;

// Integer power by repeated squaring; exact for the small degrees used here.
template <typename T>
T ipow(T z, int k) {
  T result(1);
  while (k > 0) {
    if (k & 1) result *= z;
    z *= z;
    k >>= 1;
  }
  return result;
}

enum class MapKind { Complex, Real };

// f(z) = z^d + c with d even.
struct FamilyMap {
  cplx c{0.0, 0.0};
  int d = 2;
  MapKind kind = MapKind::Complex;

  FamilyMap() = default;
  FamilyMap(cplx c_, int d_ = 2, MapKind kind_ = MapKind::Complex);

  double escape_radius() const;
  cplx operator()(cplx z) const { return (d == 2 ? z * z : ipow(z, d)) + c; }
  cplx derivative(cplx z) const { return static_cast<double>(d) * ipow(z, d - 1); }
};

enum class EscapePolicy { Stop, Continue };

struct OrbitResult {
  cplx final_point;
  double log_deriv_modulus = 0.0;
  std::optional<std::int64_t> escape_time;
  std::int64_t steps_taken = 0;
};

// Advances z0 by up to n steps. With EscapePolicy::Stop the orbit halts on
// the first step that leaves the escape disk; with Continue it records the
// escape time and keeps going.
OrbitResult iterate_orbit(const FamilyMap& map, cplx z0, std::int64_t n, bool track_derivative,
                          EscapePolicy policy = EscapePolicy::Stop);

// Log-modulus of Df^n(z) along the full orbit.
double log_abs_derivative(const FamilyMap& map, cplx z, std::int64_t n);

// All solutions of z^d = w - c; a single {0} when w = c.
std::vector<cplx> preimages(const FamilyMap& map, cplx w);

struct RenormSchedule {
  std::vector<int> periods;  // relative periods p_1, p_2, ...

  static RenormSchedule doubling(int depth);
  explicit RenormSchedule(std::vector<int> p = {});
  int depth() const { return static_cast<int>(periods.size()); }
  // P_n = p_1 ... p_n, with P_0 = 1.
  std::int64_t cumulative(int n) const;
};

// c -> f_c^period(0) on the real line.
double critical_orbit_real(int d, double c, std::int64_t period);

double find_superstable(int d, std::int64_t period, double lo, double hi);

struct DoublingLimit {
  double c = 0.0;
  std::vector<double> superstable;  // c_0 = 0, c_1 = -1, c_2, ...
};

// Walks the superstable cascade 1, 2, 4, ... until consecutive parameters
// are closer than tol, then extrapolates the geometric tail.
DoublingLimit find_doubling_limit(int d, double tol, int max_levels = 40);

// Same extrapolation from exactly `levels` superstable parameters c_0 .. c_{levels-1}.
DoublingLimit doubling_limit_at_depth(int d, int levels);

inline constexpr double kFeigenbaumC2 = -1.4011551890920506;

}  // namespace feigen
