#include <doctest.h>

#include <cmath>
#include <map>

#include "feigen/errors.hpp"
#include "feigen/fibonacci.hpp"

using namespace feigen;

namespace {

struct FibCase {
  quad a;
  PrincipalNest nest;
};

const FibCase& fib_case(double ell) {
  static std::map<double, FibCase> cache;
  auto it = cache.find(ell);
  if (it == cache.end()) {
    const quad a = find_fibonacci_parameter<quad>(ell, 14, quad(1e-32));
    it = cache.emplace(ell, FibCase{a, build_principal_nest(RealUnimodalMap<quad>(ell, a), 12)}).first;
  }
  return it->second;
}

}  // namespace

TEST_CASE("Fibonacci combinatorics") {
  const auto s = cutting_times(8);
  CHECK(s == std::vector<std::int64_t>{1, 2, 3, 5, 8, 13, 21, 34});
  const auto k = fibonacci_kneading(13);
  CHECK(k.size() == 13);
  CHECK(kneading_compare(k, k) == 0);
  CHECK_THROWS_AS(find_fibonacci_parameter<double>(1.0, 7, 1e-15), DomainError);
  CHECK_THROWS_AS(find_fibonacci_parameter<double>(0.5, 7, 1e-15), DomainError);
}

TEST_CASE("quadratic Fibonacci parameter") {
  const double a = find_fibonacci_parameter<double>(2.0, 7, 1e-15);
  CHECK(a == doctest::Approx(1.8705286321646449).epsilon(1e-12));
  const RealUnimodalMap<double> f(2.0, a);
  const auto cr = closest_returns(f, 30);
  CHECK(cr == std::vector<std::int64_t>{1, 2, 3, 5, 8, 13, 21});
  CHECK(f(f.fixed_point()) == doctest::Approx(f.fixed_point()).epsilon(1e-14));
  CHECK(f.fixed_point() > 0.0);
  // the kneading sequence of the root matches the target up to the depth searched
  CHECK(kneading_compare(itinerary(f, 6), fibonacci_kneading(6)) == 0);

  const double tighter = find_fibonacci_parameter<double>(2.0, 7, 1e-16);
  CHECK(std::abs(tighter - a) < 1e-14);
}

TEST_CASE("quad precision root agrees with double") {
  const auto& q = fib_case(2.0);
  CHECK(static_cast<double>(q.a) == doctest::Approx(1.8705286321646449).epsilon(1e-12));
  const auto cr = closest_returns(RealUnimodalMap<quad>(2.0, q.a), 1000);
  REQUIRE(cr.size() >= 14);
  const auto s = cutting_times(static_cast<int>(cr.size()));
  CHECK(cr == s);
}

TEST_CASE("principal nest structure") {
  for (double ell : {2.0, 8.0}) {
    const auto& nest = fib_case(ell).nest;
    REQUIRE(nest.depth() == 12);
    CHECK(nest.return_times.size() == 12);
    for (std::size_t n = 2; n < nest.return_times.size(); ++n)
      CHECK(nest.return_times[n] == nest.return_times[n - 1] + nest.return_times[n - 2]);
    for (int n = 0; n < nest.depth(); ++n) {
      CHECK(nest.half_width(n + 1) < nest.half_width(n));
      const Branch& b = nest.side_branches[static_cast<std::size_t>(n)];
      CHECK(b.lo < b.hi);
      // the side branch sits inside I^n and outside I^{n+1}
      CHECK(std::max(std::abs(b.lo), std::abs(b.hi)) <= nest.half_width(n) * (1.0 + 1e-12));
      CHECK(std::min(std::abs(b.lo), std::abs(b.hi)) >= nest.half_width(n + 1));
      CHECK(b.lo * b.hi > 0.0);
    }
  }
}

TEST_CASE("geometry of the principal nest") {
  CHECK(geometry_diagnostics(fib_case(2.0).nest).verdict == GeometryVerdict::Decaying);
  const auto g8 = geometry_diagnostics(fib_case(8.0).nest);
  CHECK(g8.verdict == GeometryVerdict::Bounded);
  CHECK(g8.min_ratio_last_half > 0.5);
  // I^0_1 abuts I^1; deeper side branches are separated from the central domain
  CHECK(g8.gaps.front() >= 0.0);
  for (std::size_t n = 1; n < g8.gaps.size(); ++n) CHECK(g8.gaps[n] > 0.0);

  std::vector<double> geometric;
  for (int n = 0; n < 12; ++n) geometric.push_back(std::pow(0.4, n));
  const auto g = geometry_diagnostics(geometric);
  CHECK(g.verdict == GeometryVerdict::Bounded);
  for (double r : g.ratios) CHECK(r == doctest::Approx(0.4));
  CHECK_THROWS_AS(geometry_diagnostics(std::vector<double>{1.0, 0.5, 0.25, 0.125}), PreconditionError);
}

TEST_CASE("real escape statistics") {
  const auto& q = fib_case(2.0);
  const RealUnimodalMap<double> f(2.0, static_cast<double>(q.a));
  SamplingOptions opt;
  opt.samples = 4000;
  opt.horizon = 2000;
  opt.seed = 11;
  opt.workers = 1;
  const auto s1 = real_escape_stats(f, q.nest, 0, 1, opt);
  opt.workers = 4;
  const auto s1w = real_escape_stats(f, q.nest, 0, 1, opt);
  CHECK(s1.eta.value == s1w.eta.value);
  CHECK(s1.xi.value == s1w.xi.value);
  const auto s3 = real_escape_stats(f, q.nest, 0, 3, opt);
  CHECK(s3.eta.value <= s1.eta.value);
  CHECK(s1.eta.ci_low <= s1.eta.value);
  CHECK(s1.eta.value <= s1.eta.ci_high);
  CHECK(s1.rho > 0.0);
  CHECK_THROWS_AS(real_escape_stats(f, q.nest, 2, 2, opt), PreconditionError);
  CHECK_THROWS_AS(real_escape_stats(f, q.nest, 0, 12, opt), PreconditionError);
}

TEST_CASE("wild attractor indicator") {
  const auto& q = fib_case(2.0);
  const RealUnimodalMap<double> f(2.0, static_cast<double>(q.a));
  const auto a = wild_attractor_indicator(f, q.nest, 6, 500, 400, 3, 1);
  const auto b = wild_attractor_indicator(f, q.nest, 6, 500, 400, 3, 4);
  CHECK(a.value == b.value);
  CHECK(a.value >= 0.0);
  CHECK(a.value <= 1.0);
}
