#include <doctest.h>

#include <cmath>

#include "feigen/errors.hpp"
#include "feigen/random.hpp"
#include "feigen/trichotomy.hpp"

using namespace feigen;

namespace {

std::vector<double> seq(int lo, int hi, double (*f)(int)) {
  std::vector<double> v;
  for (int m = lo; m <= hi; ++m) v.push_back(f(m));
  return v;
}

QuadraticBound quad_bound(double a, double b, double c) {
  QuadraticBound q;
  q.a = a;
  q.b = b;
  q.c = c;
  return q;
}

}  // namespace

TEST_CASE("smallest positive fixed point") {
  CHECK(*smallest_positive_fixed_point(quad_bound(2, 0, 0)) == doctest::Approx(2.0));
  CHECK_FALSE(smallest_positive_fixed_point(quad_bound(1, 1, 1)).has_value());
  const double expect = (0.5 - std::sqrt(0.21)) / 0.2;
  CHECK(*smallest_positive_fixed_point(quad_bound(0.1, 0.5, 0.1)) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(expect == doctest::Approx(0.20871).epsilon(1e-4));
}

TEST_CASE("P polynomial") {
  const auto id = build_P(0.0, 0.0, 0.1, 1.0);
  CHECK(id.is_identity());
  CHECK_FALSE(smallest_positive_fixed_point(id).has_value());

  const auto p = build_P(0.01, 0.5, 0.1, 1.0);
  CHECK(p.kind == BoundKind::P);
  CHECK(p.a == doctest::Approx(0.1));
  CHECK(p.b == doctest::Approx(0.495));
  CHECK(p.c == doctest::Approx(0.05));
  // quadratic formula on c x^2 + (b - 1) x + a = 0
  const double disc = (p.b - 1.0) * (p.b - 1.0) - 4.0 * p.a * p.c;
  const double root = ((1.0 - p.b) - std::sqrt(disc)) / (2.0 * p.c);
  const auto fp = smallest_positive_fixed_point(p);
  REQUIRE(fp.has_value());
  CHECK(*fp == doctest::Approx(root).epsilon(1e-12));
  CHECK(*fp == doctest::Approx(0.20206).epsilon(1e-4));

  const auto p2 = build_P(0.01, 0.5, 0.1, 2.0);
  CHECK(p2.a == doctest::Approx(2.0 * p.a));
  CHECK(p2.c == doctest::Approx(2.0 * p.c));
  CHECK(1.0 - (p2.b - 2.0 * 0.01 * 0.5) == doctest::Approx(0.5 * (1.0 - (p.b - 0.01 * 0.5))));

  // 1 - (eta + xi)/C + C eta xi >= (1 - eta/C)(1 - xi/C) keeps the linear term nonnegative
  for (double e : {0.1, 0.5, 0.9, 1.0})
    for (double x : {0.1, 0.5, 0.9, 1.0})
      for (double C : {1.0, 2.0, 10.0}) CHECK(build_P(e, x, 0.3, C).b >= 0.0);

  CHECK_THROWS_AS(build_P(0.1, 0.1, 0.0, 1.0), DegenerateError);
  CHECK_THROWS_AS(build_P(-0.1, 0.1, 0.1, 1.0), PreconditionError);
  CHECK_THROWS_AS(build_P(0.1, 0.1, 0.1, 0.5), PreconditionError);
}

TEST_CASE("iterating P from zero converges to the fixed point") {
  for (std::uint64_t i = 0; i < 50; ++i) {
    const double eta = 0.2 * uniform01(CounterKey{1, Stream::Test, 0, i, 0}, 0);
    const double xi = 0.2 * uniform01(CounterKey{1, Stream::Test, 1, i, 0}, 0);
    const double rho = 0.05 + 0.5 * uniform01(CounterKey{1, Stream::Test, 2, i, 0}, 0);
    const auto p = build_P(eta, xi, rho, 2.0);
    const auto fp = smallest_positive_fixed_point(p);
    if (!fp) continue;
    const double slope = p.b + 2.0 * p.c * *fp;
    if (!(slope < 1.0)) continue;
    const auto orbit = iterate_from_zero(p, 400);
    for (std::size_t k = 1; k < orbit.size(); ++k) {
      CHECK(orbit[k] >= orbit[k - 1]);
      CHECK(orbit[k] <= *fp * (1.0 + 1e-12));
    }
    CHECK(orbit.back() == doctest::Approx(*fp).epsilon(1e-6));
  }
}

TEST_CASE("Q polynomial") {
  const auto q = build_Q(0.01, 0.5, 0.1, 3.0, 3.0, 2.0, 1.0);
  CHECK(q.kind == BoundKind::Q);
  CHECK(q.a == doctest::Approx(0.1));
  CHECK(q.b == doctest::Approx(0.49 + 0.005));
  CHECK(q.c == doctest::Approx(0.05));
  // tau and upsilon drop out at delta = 2
  const auto q2 = build_Q(0.01, 0.5, 0.1, 7.0, 0.2, 2.0, 1.0);
  CHECK(q2.a == q.a);
  CHECK(q2.b == q.b);
  CHECK(q2.c == q.c);
  // max{1 - C(eta + xi), 0} leaves only the product term
  const auto neg = build_Q(0.3, 0.4, 0.1, 2.0, 2.0, 1.5, 3.0);
  CHECK(neg.b == doctest::Approx(std::pow(4.0, 0.5) * 0.3 * 0.4 / 3.0));
  CHECK(neg.a == doctest::Approx(std::pow(2.0, 0.5) * 0.3 / 0.1 / 3.0));
  CHECK(neg.c == doctest::Approx(3.0 * std::pow(2.0, 0.5) * 0.4 * 0.1));
  CHECK(neg.linear_clamped);
  CHECK_THROWS_AS(build_Q(0.1, 0.1, 0.1, 0.0, 1.0, 2.0, 1.0), PreconditionError);
  CHECK_THROWS_AS(build_Q(0.1, 0.1, 0.1, 1.0, 1.0, 2.5, 1.0), PreconditionError);
  CHECK_THROWS_AS(build_Q(0.1, 0.1, 0.0, 1.0, 1.0, 2.0, 1.0), DegenerateError);
}

TEST_CASE("classifier on synthetic suites") {
  const auto pow2 = seq(1, 10, [](int m) { return std::pow(2.0, -m); });
  const auto flat = seq(1, 10, [](int) { return 0.3; });
  const auto harmonic = seq(1, 10, [](int m) { return 1.0 / m; });
  for (double C : {3.0, 10.0, 30.0}) {
    CHECK(classify(pow2, flat, C).regime == Regime::Lean);
    CHECK(classify(flat, pow2, C).regime == Regime::BlackHole);
    const auto b = classify(harmonic, harmonic, C);
    CHECK(b.regime == Regime::Balanced);
    CHECK(std::abs(b.inverse_eta_fit.slope - 1.0) <= 0.05);
    CHECK(b.calibration_C == C);
  }
  const auto v = classify(pow2, flat);
  CHECK(v.eta_fit.slope == doctest::Approx(-std::log(2.0)));
  CHECK(v.ratio_log.size() == 10);
  CHECK(classify(flat, flat).regime == Regime::Inconclusive);
  CHECK_FALSE(classify(flat, flat).notes.empty());
}

TEST_CASE("classifier preconditions") {
  const std::vector<double> ok{0.5, 0.4, 0.3, 0.2};
  CHECK_THROWS_AS(classify({0.5, 0.0, 0.3, 0.2}, ok), DomainError);
  CHECK_THROWS_AS(classify({0.5, 1.5, 0.3, 0.2}, ok), DomainError);
  CHECK_THROWS_AS(classify({0.5, 0.4, 0.3}, {0.5, 0.4, 0.3}), PreconditionError);
  CHECK_THROWS_AS(classify(ok, {0.5, 0.4, 0.3}), PreconditionError);
}

TEST_CASE("classifier is deterministic and consistent with its triggers") {
  for (std::uint64_t t = 0; t < 300; ++t) {
    std::vector<double> eta, xi;
    const double re = 0.2 + 0.6 * uniform01(CounterKey{t, Stream::Test, 9, 0, 0}, 0);
    const double rx = 0.2 + 0.6 * uniform01(CounterKey{t, Stream::Test, 9, 1, 0}, 0);
    for (std::uint64_t m = 1; m <= 8; ++m) {
      eta.push_back(std::pow(re, static_cast<double>(m)) * (0.5 + 0.5 * uniform01(CounterKey{t, Stream::Test, 10, m, 0}, 0)));
      xi.push_back(std::pow(rx, static_cast<double>(m)) * (0.5 + 0.5 * uniform01(CounterKey{t, Stream::Test, 11, m, 0}, 0)));
    }
    for (double C : {3.0, 10.0}) {
      const auto v = classify(eta, xi, C);
      CHECK(v.regime == classify(eta, xi, C).regime);
      bool lean = false, hole = false;
      for (std::size_t i = 0; i < eta.size(); ++i) {
        CHECK_FALSE((eta[i] < xi[i] / C && eta[i] > C * xi[i]));
        lean = lean || eta[i] < xi[i] / C;
        hole = hole || eta[i] > C * xi[i];
      }
      if (v.regime == Regime::Lean) CHECK(lean);
      if (v.regime == Regime::BlackHole) CHECK(hole);
      if (v.regime == Regime::Balanced) CHECK_FALSE((lean || hole));
    }
  }
}

TEST_CASE("omega consistency report") {
  std::vector<LevelQuantities> exact;
  for (int m = 1; m <= 4; ++m) {
    const double eta = std::pow(0.5, m), xi = 0.3, rho = std::pow(0.2, m);
    exact.push_back(LevelQuantities{m, eta, xi, rho, eta / (xi * rho)});
  }
  const auto rep = omega_consistency_report(exact);
  for (const auto& r : rep.rows) CHECK(r.zero_area_ratio == doctest::Approx(1.0));

  std::vector<LevelQuantities> geo;
  for (int m = 1; m <= 4; ++m) geo.push_back(LevelQuantities{m, 0.5, 0.5, 0.5, std::pow(3.0, m)});
  const auto g = omega_consistency_report(geo);
  int pairs = 0;
  for (const auto& r : g.rows) {
    if (!r.square_ratio) continue;
    ++pairs;
    CHECK(*r.square_ratio == doctest::Approx(1.0));
    CHECK_FALSE(r.square_flag);
  }
  CHECK(pairs == 2);
  CHECK(g.rows.back().zero_area_ratio == doctest::Approx(81.0 * 0.5));
  CHECK(g.flagged == 0);
  geo.push_back(LevelQuantities{5, 0.5, 0.5, 0.5, 1e4});
  CHECK(omega_consistency_report(geo).flagged == 1);
  CHECK_THROWS_AS(omega_consistency_report({LevelQuantities{3, 0.5, 0.5, 0.5, 1.0}, LevelQuantities{5, 0.5, 0.5, 0.5, 1.0}}),
                  PairError);
}

TEST_CASE("theta fit") {
  const auto flat = seq(1, 8, [](int) { return 0.3; });
  CHECK(theta_bound_fit(flat, flat).theta == doctest::Approx(1.0));
  const auto quarter = seq(1, 10, [](int m) { return std::pow(4.0, -m); });
  const auto one = seq(1, 10, [](int) { return 1.0; });
  const auto th = theta_bound_fit(quarter, one);
  CHECK(th.theta == doctest::Approx(0.25).epsilon(0.01));
  CHECK(th.fit.r_squared > 0.99);
}
