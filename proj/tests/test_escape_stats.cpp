#include <doctest.h>

#include <cmath>

#include "feigen/errors.hpp"
#include "feigen/escape_stats.hpp"
#include "synthetic.hpp"

using namespace feigen;
using testing_support::disk_nest;
using testing_support::LinearMap;

namespace {

DomainNest cf_nest(int depth) { return build_nest(FamilyMap(kFeigenbaumC2), RenormSchedule::doubling(depth), depth, 0.5); }

SamplingOptions opts(std::int64_t samples, std::uint64_t seed = 11, std::int64_t horizon = 10000, std::size_t workers = 1) {
  SamplingOptions o;
  o.samples = samples;
  o.seed = seed;
  o.horizon = horizon;
  o.workers = workers;
  return o;
}

}  // namespace

TEST_CASE("eta is monotone in n and deterministic") {
  const auto nest = cf_nest(5);
  const auto o = opts(20000);
  double prev = 1.0;
  for (int n = 1; n <= 5; ++n) {
    const auto e = estimate_eta(nest, 0, n, o);
    CHECK(e.value <= prev);  // shared samples, exact inclusion
    CHECK(e.ci_low <= e.value);
    CHECK(e.value <= e.ci_high);
    prev = e.value;
  }
  const auto a = estimate_eta(nest, 0, 1, o);
  const auto b = estimate_eta(nest, 0, 1, opts(20000, 11, 10000, 4));
  CHECK(a.value == b.value);
  CHECK(a.ci_low == b.ci_low);
  CHECK_THROWS_AS(estimate_eta(nest, 0, 1, opts(0)), EmptySampleError);
  CHECK_THROWS_AS(estimate_eta(nest, 2, 2, o), PreconditionError);
}

TEST_CASE("xi horizon behaviour") {
  const auto nest = cf_nest(4);
  CHECK(estimate_xi(nest, 0, 1, opts(5000, 3, 0)).value == 1.0);
  const auto short_h = estimate_xi(nest, 0, 2, opts(5000, 3, 100));
  const auto long_h = estimate_xi(nest, 0, 2, opts(5000, 3, 10000));
  CHECK(long_h.value <= short_h.value);
  const auto xu = estimate_xi_upsilon(nest, 0, 1, opts(5000, 3, 10000, 3));
  CHECK(xu.xi.value == estimate_xi(nest, 0, 1, opts(5000, 3, 10000)).value);
  CHECK(xu.censored_fraction >= 0.0);
  CHECK(xu.censored_fraction <= 1.0);
}

TEST_CASE("rho on synthetic disks and telescoping") {
  const auto syn = disk_nest(LinearMap{}, {1.0, 0.5, 0.2}, {0.6, 0.3, 0.1});
  CHECK(estimate_rho(syn, 0, 2, 1000, 1).value == doctest::Approx(0.1 * 0.1 / (0.6 * 0.6)));
  CHECK(estimate_rho(syn, 0, 1, 1000, 1).value == doctest::Approx(0.3 * 0.3 / (0.6 * 0.6)));

  const auto nest = cf_nest(4);
  const auto r01 = estimate_rho(nest, 0, 1, 100000, 5);
  const auto r12 = estimate_rho(nest, 1, 2, 100000, 5);
  const auto r02 = estimate_rho(nest, 0, 2, 100000, 5);
  CHECK(r01.ci_low * r12.ci_low <= r02.ci_high);
  CHECK(r01.ci_high * r12.ci_high >= r02.ci_low);
  CHECK(r02.value > 0.0);
}

TEST_CASE("tau on a linear contraction") {
  // z -> z/2 on U^0 = unit disk lands in V^1 = disk(0.1) after k <= 4 steps
  const auto syn = disk_nest(LinearMap{0.5}, {1.0, 0.1}, {1.0, 0.05});
  const auto et = estimate_eta_tau(syn, 0, 1, opts(10000));
  CHECK(et.eta.value == 1.0);
  CHECK(et.tau_min == doctest::Approx(std::pow(2.0, -4)).epsilon(1e-12));
  const double k = -std::log2(et.tau_min);
  CHECK(k == doctest::Approx(std::round(k)).epsilon(1e-12));
  // expanding map: every passage A^1 -> A^0 has |Df^k| = 2^k
  const auto grow = disk_nest(LinearMap{2.0}, {1.0, 0.1}, {0.2, 0.05});
  const auto xu = estimate_xi_upsilon(grow, 0, 1, opts(10000));
  const double j = std::log2(xu.upsilon_min);
  CHECK(j == doctest::Approx(std::round(j)).epsilon(1e-12));
  CHECK(xu.upsilon_min >= 2.0);
}

TEST_CASE("tau and upsilon at the doubling limit") {
  const auto nest = cf_nest(4);
  const auto [tau, ups] = estimate_tau_upsilon(nest, 0, 2, opts(20000));
  CHECK(tau > 0.0);
  CHECK(ups > 0.0);
  const auto again = estimate_tau_upsilon(nest, 0, 2, opts(20000, 11, 10000, 4));
  CHECK(tau == again.first);
  CHECK(ups == again.second);
}

TEST_CASE("kappa is comparable to xi plus eta") {
  const auto nest = cf_nest(4);
  const auto o = opts(20000);
  for (int n = 1; n <= 3; ++n) {
    const auto s = compute_level_stats(nest, 0, n, o);
    const double ref = estimate_xi(nest, 0, 1, o).value + s.eta.value;
    CHECK(s.kappa.value <= 5.0 * ref);
    CHECK(s.kappa.value >= ref / 5.0);
  }
}

TEST_CASE("exp lemma report") {
  auto row = [](int n, double eta, double xi) {
    LevelStats s;
    s.m = 0;
    s.n = n;
    s.eta = Estimate{eta, eta, eta, 1000};
    s.xi = Estimate{xi, xi, xi, 1000};
    return s;
  };
  std::vector<LevelStats> flat{row(1, 0.4, 0.0), row(2, 0.4, 0.0), row(3, 0.4, 0.0), row(4, 0.4, 0.0)};
  const auto f = verify_exp_lemma(flat);
  CHECK(f.feasible);
  for (const auto& r : f.rows) CHECK(r.ratio == 1.0);

  std::vector<LevelStats> half{row(1, 0.5, 0.5), row(2, 0.25, 0.5), row(3, 0.125, 0.5), row(4, 0.0625, 0.5)};
  const auto h = verify_exp_lemma(half);
  CHECK(h.feasible);
  CHECK(h.c == doctest::Approx(1.0));
  for (const auto& r : h.rows) CHECK(r.ratio == doctest::Approx(0.5));

  CHECK_THROWS_AS(verify_exp_lemma({row(1, 0.5, 0.5), row(2, 0.2, 0.5)}), PreconditionError);
  CHECK_THROWS_AS(verify_exp_lemma({row(1, 0.5, 0.5), row(3, 0.2, 0.5), row(4, 0.1, 0.5)}), PreconditionError);
}
