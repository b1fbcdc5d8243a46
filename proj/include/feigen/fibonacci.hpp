#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/float128.hpp>

#include "feigen/escape_stats.hpp"
#include "feigen/statistics.hpp"

namespace feigen {

using quad = boost::multiprecision::float128;

// f(x) = a - |x|^ell
template <typename Scalar>
struct RealUnimodalMap {
  double ell = 2.0;
  Scalar a = 0;

  RealUnimodalMap(double ell_, Scalar a_);
  Scalar operator()(Scalar x) const;
  // orientation-reversing fixed point p > 0
  Scalar fixed_point() const;
};

enum class Symbol : int { L = -1, C = 0, R = 1 };

// Kneading sequence nu_1 .. nu_length of the Fibonacci combinatorics.
std::vector<Symbol> fibonacci_kneading(std::size_t length);

// Cutting times 1, 2, 3, 5, 8, ...
std::vector<std::int64_t> cutting_times(int count);

// Parity-lexicographic order of two itineraries of the critical value.
int kneading_compare(const std::vector<Symbol>& lhs, const std::vector<Symbol>& rhs);

template <typename Scalar>
std::vector<Symbol> itinerary(const RealUnimodalMap<Scalar>& f, std::size_t length);

template <typename Scalar>
Scalar find_fibonacci_parameter(double ell, int depth, Scalar tol);

// Times k >= 1 where |f^k(0)| beats every earlier |f^j(0)|, j >= 1.
template <typename Scalar>
std::vector<std::int64_t> closest_returns(const RealUnimodalMap<Scalar>& f, std::int64_t horizon);

struct Branch {
  double lo = 0.0, hi = 0.0;
  std::int64_t time = 0;
};

// I^n = [-x_n, x_n]; I^{n+1} is the central domain of the first return map
// to I^n, with return time r_n.
struct PrincipalNest {
  double ell = 2.0;
  std::vector<quad> half_widths;          // x_0 .. x_depth
  std::vector<std::int64_t> return_times; // r_0 .. r_{depth-1}
  std::vector<Branch> side_branches;      // I^n_1, the branch holding f^{r_n}(0)

  int depth() const { return static_cast<int>(half_widths.size()) - 1; }
  double half_width(int n) const { return static_cast<double>(half_widths.at(static_cast<std::size_t>(n))); }
};

template <typename Scalar>
PrincipalNest build_principal_nest(const RealUnimodalMap<Scalar>& f, int depth);

enum class GeometryVerdict { Bounded, Decaying, Undecided };

const char* to_string(GeometryVerdict v);

struct GeometryReport {
  std::vector<double> ratios;  // |I^{n+1}| / |I^n|
  std::vector<double> gaps;    // gap between I^{n+1} and I^n_1, over |I^n|
  GeometryVerdict verdict = GeometryVerdict::Undecided;
  double min_ratio_last_half = 0.0;
};

GeometryReport geometry_diagnostics(const std::vector<double>& half_widths, const std::vector<double>& gaps = {});
GeometryReport geometry_diagnostics(const PrincipalNest& nest);

struct RealLevelStats {
  int m = 0, n = 1;
  Estimate eta, xi;
  double rho = 0.0;
  double xi_censored_fraction = 0.0;
};

// Length-based analogues of eta, xi and rho for the level-m return dynamics
// (central branch on I^{m+1} plus the side branch I^m_1). eta samples
// I^{m+1} and asks for landing in I^{n+1}; xi samples I^n minus I^{n+1}
// and asks for no return to I^n.
RealLevelStats real_escape_stats(const RealUnimodalMap<double>& f, const PrincipalNest& nest, int m, int n,
                                 const SamplingOptions& opt);

// Fraction of uniform core points whose orbit visits I^level during the
// second half of `iterations` steps.
Estimate wild_attractor_indicator(const RealUnimodalMap<double>& f, const PrincipalNest& nest, int level,
                                  std::int64_t samples, std::int64_t iterations, std::uint64_t seed,
                                  std::size_t workers = 1);

}  // namespace feigen
