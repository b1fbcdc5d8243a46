#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <fmt/format.h>

#include "feigen/domain_nest.hpp"
#include "feigen/parallel.hpp"
#include "feigen/random.hpp"
#include "feigen/statistics.hpp"

namespace feigen {

struct SamplingOptions {
  std::int64_t samples = 100000;
  std::uint64_t seed = 1;
  std::int64_t horizon = 100000;  // f_m steps
  std::size_t workers = 1;
  int max_attempts = 4096;  // rejection attempts per accepted sample
};

struct EtaTau {
  Estimate eta;
  double tau_min = std::numeric_limits<double>::quiet_NaN();  // NaN when nothing landed
  std::int64_t rejected = 0;  // sample indices with no accepted draw
};

struct XiUpsilon {
  Estimate xi;
  double censored_fraction = 0.0;
  double upsilon_min = std::numeric_limits<double>::quiet_NaN();
  std::int64_t rejected = 0;
};

struct LevelStats {
  int m = 0;
  int n = 1;
  Estimate eta, xi, rho, kappa;
  double tau_min = std::numeric_limits<double>::quiet_NaN();
  double upsilon_min = std::numeric_limits<double>::quiet_NaN();
  double xi_censored_fraction = 0.0;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  std::int64_t horizon = 0;
};

struct ExpLemmaRow {
  int n = 0;
  double ratio = 0.0, ratio_low = 0.0, ratio_high = 0.0;
  double xi = 0.0;
  double c_min = 1.0;   // smallest C with ratio <= 1 - xi / C
  double c0_min = 1.0;  // smallest C0 with max(1/C0, 1 - C0 xi) <= ratio
};

struct ExpLemmaReport {
  std::vector<ExpLemmaRow> rows;
  double c = 1.0;
  double c0 = 1.0;
  bool feasible = false;
};

namespace detail {

inline void check_levels(int depth, int m, int n) {
  if (!(0 <= m && m < n && n <= depth))
    throw PreconditionError(fmt::format("need 0 <= m < n <= depth, got m={} n={} depth={}", m, n, depth));
}

inline void check_samples(std::int64_t samples) {
  if (samples <= 0) throw EmptySampleError("sample count must be positive");
}

// Rejection sampling of a uniform point of V^level lying in `want`.
template <typename Map>
std::optional<cplx> draw_in(const BasicDomainNest<Map>& nest, int level, Region want, Stream stream,
                            std::uint64_t seed, std::uint64_t index, int max_attempts) {
  const double r = nest.radius(level);
  for (int j = 0; j < max_attempts; ++j) {
    const CounterKey key{seed, stream, static_cast<std::uint64_t>(level), index, static_cast<std::uint64_t>(j)};
    const cplx z = r * unit_disk_point(key);
    if (nest.membership(level, z) == want) return z;
  }
  return std::nullopt;
}

inline double min_or_nan(const std::vector<double>& v) {
  double best = std::numeric_limits<double>::infinity();
  for (double x : v)
    if (!std::isnan(x)) best = std::min(best, x);
  return std::isinf(best) ? std::numeric_limits<double>::quiet_NaN() : best;
}

}  // namespace detail

// eta_{m,n}: fraction of U^m whose f_m-orbit lands in V^n (k >= 0) while
// staying in U^m. tau_min is the smallest |Df_m^k| at first landing.
template <typename Map>
EtaTau estimate_eta_tau(const BasicDomainNest<Map>& nest, int m, int n, const SamplingOptions& opt) {
  detail::check_levels(nest.depth(), m, n);
  detail::check_samples(opt.samples);
  const auto N = static_cast<std::size_t>(opt.samples);
  // 0 rejected, 1 missed, 2 landed
  std::vector<unsigned char> outcome(N, 0);
  std::vector<double> log_tau(N, std::numeric_limits<double>::quiet_NaN());
  const double rn = nest.radius(n);
  parallel_for(N, opt.workers, [&](std::size_t i) {
    const auto start = detail::draw_in(nest, m, Region::InsideU, Stream::Eta, opt.seed, i, opt.max_attempts);
    if (!start) return;
    cplx x = *start;
    double logd = 0.0;
    outcome[i] = 1;
    for (std::int64_t k = 0;; ++k) {
      if (std::abs(x) < rn) {
        outcome[i] = 2;
        log_tau[i] = logd;
        return;
      }
      if (k >= opt.horizon || nest.membership(m, x) != Region::InsideU) return;
      const auto next = nest.return_map(m, x, logd);
      if (!next) return;
      x = *next;
    }
  });
  std::int64_t landed = 0, rejected = 0;
  for (auto o : outcome) {
    landed += (o == 2);
    rejected += (o == 0);
  }
  if (rejected == opt.samples) throw DegenerateAreaError("no sample point fell in U^m");
  EtaTau out;
  out.eta = wilson_estimate(landed, opt.samples - rejected);
  out.rejected = rejected;
  const double lt = detail::min_or_nan(log_tau);
  out.tau_min = std::exp(lt);
  return out;
}

template <typename Map>
Estimate estimate_eta(const BasicDomainNest<Map>& nest, int m, int n, const SamplingOptions& opt) {
  return estimate_eta_tau(nest, m, n, opt).eta;
}

// xi_{m,n}: fraction of A^n whose f_m-orbit never returns to V^n within the
// horizon. Leaving U^m or the escape disk counts as never returning.
// upsilon_min is the smallest |Df_m^k| over passages A^n -> A^m avoiding A^n.
template <typename Map>
XiUpsilon estimate_xi_upsilon(const BasicDomainNest<Map>& nest, int m, int n, const SamplingOptions& opt) {
  detail::check_levels(nest.depth(), m, n);
  detail::check_samples(opt.samples);
  const auto N = static_cast<std::size_t>(opt.samples);
  // 0 rejected, 1 returned, 2 never returned, 3 censored
  std::vector<unsigned char> outcome(N, 0);
  std::vector<double> log_ups(N, std::numeric_limits<double>::quiet_NaN());
  const double rn = nest.radius(n);
  parallel_for(N, opt.workers, [&](std::size_t i) {
    const auto start = detail::draw_in(nest, n, Region::InAnnulus, Stream::Xi, opt.seed, i, opt.max_attempts);
    if (!start) return;
    cplx x = *start;
    double logd = 0.0;
    for (std::int64_t k = 1; k <= opt.horizon; ++k) {
      const auto next = nest.return_map(m, x, logd);
      if (!next) {
        outcome[i] = 2;
        return;
      }
      x = *next;
      if (std::abs(x) < rn) {
        outcome[i] = 1;
        return;
      }
      if (nest.membership(m, x) == Region::InAnnulus) {
        log_ups[i] = logd;
        outcome[i] = 2;
        return;
      }
      if (!nest.in_v(m, x)) {
        outcome[i] = 2;
        return;
      }
    }
    outcome[i] = 3;
  });
  std::int64_t never = 0, censored = 0, rejected = 0;
  for (auto o : outcome) {
    never += (o >= 2);
    censored += (o == 3);
    rejected += (o == 0);
  }
  if (rejected == opt.samples) throw DegenerateAreaError("no sample point fell in A^n");
  XiUpsilon out;
  const std::int64_t accepted = opt.samples - rejected;
  out.xi = wilson_estimate(never, accepted);
  out.censored_fraction = static_cast<double>(censored) / static_cast<double>(accepted);
  out.upsilon_min = std::exp(detail::min_or_nan(log_ups));
  out.rejected = rejected;
  return out;
}

template <typename Map>
Estimate estimate_xi(const BasicDomainNest<Map>& nest, int m, int n, const SamplingOptions& opt) {
  return estimate_xi_upsilon(nest, m, n, opt).xi;
}

// (tau_min, upsilon_min); these are sampled minima, so upper bounds for the
// true infima.
template <typename Map>
std::pair<double, double> estimate_tau_upsilon(const BasicDomainNest<Map>& nest, int m, int n,
                                               const SamplingOptions& opt) {
  const double tau = estimate_eta_tau(nest, m, n, opt).tau_min;
  const double ups = estimate_xi_upsilon(nest, m, n, opt).upsilon_min;
  if (std::isnan(tau) || std::isnan(ups))
    throw NoEventError(fmt::format("no qualifying {} orbit sampled", std::isnan(tau) ? "landing" : "passage"));
  return {tau, ups};
}

// rho_{m,n} = |U^n| / |U^m| from one set of unit-disk samples scaled to
// both radii. Synthetic levels with a fixed U radius use the exact area.
template <typename Map>
Estimate estimate_rho(const BasicDomainNest<Map>& nest, int m, int n, std::int64_t samples, std::uint64_t seed,
                      std::size_t workers = 1) {
  detail::check_levels(nest.depth(), m, n);
  detail::check_samples(samples);
  auto fraction = [&](int level) -> Estimate {
    const LevelDomain& L = nest.level(level);
    if (L.u_radius) {
      const double f = (*L.u_radius / L.v_radius) * (*L.u_radius / L.v_radius);
      return Estimate{f, f, f, samples};
    }
    std::vector<unsigned char> hit(static_cast<std::size_t>(samples), 0);
    parallel_for(hit.size(), workers, [&](std::size_t i) {
      const CounterKey key{seed, Stream::Rho, 0, i, 0};
      hit[i] = nest.membership(level, L.v_radius * unit_disk_point(key)) == Region::InsideU;
    });
    std::int64_t count = 0;
    for (auto h : hit) count += h;
    return wilson_estimate(count, samples);
  };
  const Estimate fm = fraction(m);
  const Estimate fn = fraction(n);
  if (fm.value == 0.0) throw DegenerateAreaError("U^m has zero sampled area");
  const double scale = (nest.radius(n) / nest.radius(m)) * (nest.radius(n) / nest.radius(m));
  Estimate out;
  out.value = scale * fn.value / fm.value;
  out.ci_low = fm.ci_high > 0.0 ? scale * fn.ci_low / fm.ci_high : 0.0;
  out.ci_high = fm.ci_low > 0.0 ? scale * fn.ci_high / fm.ci_low : std::numeric_limits<double>::infinity();
  out.n_samples = samples;
  return out;
}

// kappa_{m,n}: fraction of A^m whose f-orbit passes through V^n (or leaves
// for good) before coming back to A^m. Horizon is counted in f_m steps.
template <typename Map>
Estimate estimate_kappa(const BasicDomainNest<Map>& nest, int m, int n, const SamplingOptions& opt) {
  detail::check_levels(nest.depth(), m, n);
  detail::check_samples(opt.samples);
  const auto N = static_cast<std::size_t>(opt.samples);
  std::vector<unsigned char> outcome(N, 0);  // 0 rejected, 1 back in A^m, 2 event
  const double rn = nest.radius(n);
  const double R = nest.map().escape_radius();
  const std::int64_t steps = opt.horizon * nest.level(m).period;
  parallel_for(N, opt.workers, [&](std::size_t i) {
    const auto start = detail::draw_in(nest, m, Region::InAnnulus, Stream::Kappa, opt.seed, i, opt.max_attempts);
    if (!start) return;
    cplx x = *start;
    outcome[i] = 2;
    for (std::int64_t k = 1; k <= steps; ++k) {
      x = nest.map()(x);
      if (!(std::abs(x) <= R) || std::abs(x) < rn) return;
      if (nest.membership(m, x) == Region::InAnnulus) {
        outcome[i] = 1;
        return;
      }
    }
  });
  std::int64_t events = 0, rejected = 0;
  for (auto o : outcome) {
    events += (o == 2);
    rejected += (o == 0);
  }
  if (rejected == opt.samples) throw DegenerateAreaError("no sample point fell in A^m");
  return wilson_estimate(events, opt.samples - rejected);
}

template <typename Map>
LevelStats compute_level_stats(const BasicDomainNest<Map>& nest, int m, int n, const SamplingOptions& opt,
                               bool with_kappa = true) {
  LevelStats s;
  s.m = m;
  s.n = n;
  const EtaTau et = estimate_eta_tau(nest, m, n, opt);
  const XiUpsilon xu = estimate_xi_upsilon(nest, m, n, opt);
  s.eta = et.eta;
  s.tau_min = et.tau_min;
  s.xi = xu.xi;
  s.upsilon_min = xu.upsilon_min;
  s.xi_censored_fraction = xu.censored_fraction;
  s.rho = estimate_rho(nest, m, n, opt.samples, opt.seed, opt.workers);
  if (with_kappa) s.kappa = estimate_kappa(nest, m, n, opt);
  s.samples = opt.samples;
  s.seed = opt.seed;
  s.horizon = opt.horizon;
  return s;
}

// Checks max(1/C0, 1 - C0 xi_n) <= eta_{n+1}/eta_n <= 1 - xi_n / C for
// consecutive n, using the most permissive end of each confidence interval.
ExpLemmaReport verify_exp_lemma(const std::vector<LevelStats>& stats, double c_max = 100.0);

}  // namespace feigen
