#include "feigen/fibonacci.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "feigen/errors.hpp"
#include "feigen/parallel.hpp"
#include "feigen/random.hpp"

namespace feigen {

namespace {

bool is_small_integer(double ell) { return ell == std::floor(ell) && ell >= 1.0 && ell <= 64.0; }

template <typename Scalar>
Scalar abs_pow(Scalar x, double ell) {
  using std::abs;
  using std::pow;
  const Scalar ax = abs(x);
  if (is_small_integer(ell)) return ipow(ax, static_cast<int>(ell));
  if (ax == 0) return Scalar(0);
  return pow(ax, Scalar(ell));
}

template <typename Scalar>
Symbol symbol_of(Scalar x) {
  return x < 0 ? Symbol::L : (x > 0 ? Symbol::R : Symbol::C);
}

template <typename Scalar>
Scalar iterate(const RealUnimodalMap<Scalar>& f, Scalar x, std::int64_t k) {
  for (std::int64_t j = 0; j < k; ++j) x = f(x);
  return x;
}

}  // namespace

template <typename Scalar>
RealUnimodalMap<Scalar>::RealUnimodalMap(double ell_, Scalar a_) : ell(ell_), a(a_) {
  if (!(ell > 1.0)) throw DomainError(fmt::format("criticality must exceed 1, got {}", ell));
}

template <typename Scalar>
Scalar RealUnimodalMap<Scalar>::operator()(Scalar x) const {
  return a - abs_pow(x, ell);
}

template <typename Scalar>
Scalar RealUnimodalMap<Scalar>::fixed_point() const {
  // a - p^ell - p is decreasing on [0, a]
  Scalar lo = 0, hi = a;
  for (int it = 0; it < 400; ++it) {
    const Scalar mid = (lo + hi) / 2;
    if (mid <= lo || mid >= hi) break;
    if (a - abs_pow(mid, ell) - mid > 0) lo = mid;
    else hi = mid;
  }
  return (lo + hi) / 2;
}

std::vector<std::int64_t> cutting_times(int count) {
  std::vector<std::int64_t> S;
  for (int k = 0; k < count; ++k) {
    if (k == 0) S.push_back(1);
    else if (k == 1) S.push_back(2);
    else S.push_back(S[static_cast<std::size_t>(k - 1)] + S[static_cast<std::size_t>(k - 2)]);
  }
  return S;
}

std::vector<Symbol> fibonacci_kneading(std::size_t length) {
  // 1-based: nu[1] = R; block (S_{k-1}, S_k] copies nu_1 .. nu_{S_q - 1}
  // and flips nu_{S_q}, with q = max(k - 2, 0).
  std::vector<Symbol> nu{Symbol::C, Symbol::R};
  int count = 2;
  while (cutting_times(count).back() < static_cast<std::int64_t>(length)) ++count;
  const auto S = cutting_times(count + 1);
  for (int k = 1; nu.size() <= length; ++k) {
    const std::int64_t Sq = S[static_cast<std::size_t>(std::max(k - 2, 0))];
    for (std::int64_t j = 1; j < Sq; ++j) nu.push_back(nu[static_cast<std::size_t>(j)]);
    const Symbol s = nu[static_cast<std::size_t>(Sq)];
    nu.push_back(s == Symbol::R ? Symbol::L : Symbol::R);
  }
  return std::vector<Symbol>(nu.begin() + 1, nu.begin() + 1 + static_cast<std::ptrdiff_t>(length));
}

int kneading_compare(const std::vector<Symbol>& lhs, const std::vector<Symbol>& rhs) {
  const std::size_t n = std::min(lhs.size(), rhs.size());
  int parity = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (lhs[i] != rhs[i]) {
      const int c = static_cast<int>(lhs[i]) < static_cast<int>(rhs[i]) ? -1 : 1;
      return parity ? -c : c;
    }
    if (lhs[i] == Symbol::R) parity ^= 1;
  }
  return 0;
}

template <typename Scalar>
std::vector<Symbol> itinerary(const RealUnimodalMap<Scalar>& f, std::size_t length) {
  std::vector<Symbol> out;
  out.reserve(length);
  Scalar x = f.a;
  for (std::size_t i = 0; i < length; ++i) {
    out.push_back(symbol_of(x));
    x = f(x);
  }
  return out;
}

template <typename Scalar>
Scalar find_fibonacci_parameter(double ell, int depth, Scalar tol) {
  if (!(ell > 1.0)) throw DomainError(fmt::format("criticality must exceed 1, got {}", ell));
  if (depth < 3) throw PreconditionError("Fibonacci depth must be at least 3");
  if (!(tol > 0)) throw PreconditionError("tol must be positive");
  const auto S = cutting_times(depth + 4);
  const auto length = static_cast<std::size_t>(S[static_cast<std::size_t>(depth + 3)]);
  const auto target = fibonacci_kneading(length);

  using std::pow;
  Scalar lo = 0;
  Scalar hi = pow(Scalar(2), Scalar(1.0 / (ell - 1.0)));
  for (int it = 0; it < 600 && hi - lo > tol; ++it) {
    const Scalar mid = (lo + hi) / 2;
    if (mid <= lo || mid >= hi) break;
    if (kneading_compare(itinerary(RealUnimodalMap<Scalar>(ell, mid), length), target) < 0) lo = mid;
    else hi = mid;
  }
  const Scalar a = (lo + hi) / 2;
  const auto check = static_cast<std::size_t>(S[static_cast<std::size_t>(depth + 1)]);
  const auto it = itinerary(RealUnimodalMap<Scalar>(ell, a), check);
  if (!std::equal(it.begin(), it.end(), target.begin()))
    throw BracketError("bisection lost the Fibonacci kneading sequence");
  return a;
}

template <typename Scalar>
std::vector<std::int64_t> closest_returns(const RealUnimodalMap<Scalar>& f, std::int64_t horizon) {
  using std::abs;
  std::vector<std::int64_t> out;
  Scalar x = 0;
  Scalar best = -1;
  for (std::int64_t k = 1; k <= horizon; ++k) {
    x = f(x);
    if (best < 0 || abs(x) < best) {
      best = abs(x);
      out.push_back(k);
    }
  }
  return out;
}

namespace {

// First k >= 1 with |f^k(y)| < x.
template <typename Scalar>
std::int64_t first_return(const RealUnimodalMap<Scalar>& f, Scalar y, Scalar x, int level) {
  using std::abs;
  for (std::int64_t k = 1; k <= 50'000'000; ++k) {
    y = f(y);
    if (abs(y) < x) return k;
  }
  throw CombinatoricsError(fmt::format("no return to I^{} found", level), level);
}

// Walks from `start` in `direction` with step `step` until |f^k| leaves
// (-x, x) or the walk leaves (-limit, limit), then bisects the crossing.
template <typename Scalar>
Scalar exit_point(const RealUnimodalMap<Scalar>& f, Scalar start, Scalar direction, Scalar step, std::int64_t k,
                  Scalar x, Scalar limit) {
  using std::abs;
  auto inside = [&](Scalar y) { return abs(y) < limit && abs(iterate(f, y, k)) < x; };
  Scalar prev = start;
  for (Scalar d = step;; d += step) {
    const Scalar cur = start + direction * d;
    if (!inside(cur)) {
      Scalar in = prev, out = cur;
      for (int it = 0; it < 400; ++it) {
        const Scalar mid = (in + out) / 2;
        if (mid == in || mid == out) break;
        if (inside(mid)) in = mid;
        else out = mid;
      }
      return (in + out) / 2;
    }
    prev = cur;
  }
}

}  // namespace

template <typename Scalar>
PrincipalNest build_principal_nest(const RealUnimodalMap<Scalar>& f, int depth) {
  using std::abs;
  if (depth < 1) throw PreconditionError("principal nest depth must be positive");
  PrincipalNest nest;
  nest.ell = f.ell;
  Scalar x = f.fixed_point();
  nest.half_widths.push_back(quad(x));
  for (int n = 0; n < depth; ++n) {
    const std::int64_t r = first_return(f, Scalar(0), x, n);
    const std::size_t N = nest.return_times.size();
    if (N >= 2 && r != nest.return_times[N - 1] + nest.return_times[N - 2])
      throw CombinatoricsError(fmt::format("return time {} at level {} breaks the Fibonacci recursion", r, n), n);
    const Scalar next = exit_point(f, Scalar(0), Scalar(1), x / 4096, r, x, x);
    if (!(next < x * (1 - 1e-12)))
      throw CombinatoricsError(fmt::format("pullback of I^{} is not a proper subinterval", n), n);

    // side branch around f^r(0)
    const Scalar y = iterate(f, Scalar(0), r);
    const std::int64_t s = first_return(f, y, x, n);
    const Scalar side_step = x / 65536;
    const Scalar lo = exit_point(f, y, Scalar(-1), side_step, s, x, x);
    const Scalar hi = exit_point(f, y, Scalar(1), side_step, s, x, x);

    nest.return_times.push_back(r);
    nest.side_branches.push_back(Branch{static_cast<double>(lo), static_cast<double>(hi), s});
    nest.half_widths.push_back(quad(next));
    x = next;
  }
  return nest;
}

const char* to_string(GeometryVerdict v) {
  switch (v) {
    case GeometryVerdict::Bounded: return "Bounded";
    case GeometryVerdict::Decaying: return "Decaying";
    default: return "Undecided";
  }
}

GeometryReport geometry_diagnostics(const std::vector<double>& half_widths, const std::vector<double>& gaps) {
  if (half_widths.size() < 5) throw PreconditionError("geometry diagnostics need depth >= 4");
  GeometryReport rep;
  for (std::size_t i = 0; i + 1 < half_widths.size(); ++i) rep.ratios.push_back(half_widths[i + 1] / half_widths[i]);
  rep.gaps = gaps;
  const std::size_t half = rep.ratios.size() / 2;
  const std::vector<double> tail(rep.ratios.begin() + static_cast<std::ptrdiff_t>(half), rep.ratios.end());
  rep.min_ratio_last_half = *std::min_element(tail.begin(), tail.end());
  bool decreasing = true;
  for (std::size_t i = 1; i < tail.size(); ++i) decreasing = decreasing && tail[i] < tail[i - 1];
  if (decreasing && tail.back() < 0.05) rep.verdict = GeometryVerdict::Decaying;
  else if (rep.min_ratio_last_half >= 0.05) rep.verdict = GeometryVerdict::Bounded;
  return rep;
}

GeometryReport geometry_diagnostics(const PrincipalNest& nest) {
  std::vector<double> widths, gaps;
  for (int n = 0; n <= nest.depth(); ++n) widths.push_back(nest.half_width(n));
  for (int n = 0; n < nest.depth(); ++n) {
    const Branch& b = nest.side_branches[static_cast<std::size_t>(n)];
    const double inner = std::min(std::abs(b.lo), std::abs(b.hi));
    gaps.push_back((inner - nest.half_width(n + 1)) / (2.0 * nest.half_width(n)));
  }
  return geometry_diagnostics(widths, gaps);
}

namespace {

struct ReturnDynamics {
  const RealUnimodalMap<double>& f;
  double central;  // x_{m+1}
  std::int64_t central_time;
  Branch side;

  std::optional<double> operator()(double x) const {
    if (std::abs(x) < central) return iterate(f, x, central_time);
    if (x > side.lo && x < side.hi) return iterate(f, x, side.time);
    return std::nullopt;
  }
};

}  // namespace

RealLevelStats real_escape_stats(const RealUnimodalMap<double>& f, const PrincipalNest& nest, int m, int n,
                                 const SamplingOptions& opt) {
  if (!(0 <= m && m < n && n < nest.depth()))
    throw PreconditionError(fmt::format("need 0 <= m < n < depth, got m={} n={} depth={}", m, n, nest.depth()));
  if (opt.samples <= 0) throw EmptySampleError("sample count must be positive");
  const ReturnDynamics g{f, nest.half_width(m + 1), nest.return_times[static_cast<std::size_t>(m)],
                         nest.side_branches[static_cast<std::size_t>(m)]};
  const double land = nest.half_width(n + 1);
  const double xn = nest.half_width(n);
  const auto N = static_cast<std::size_t>(opt.samples);

  std::vector<unsigned char> landed(N, 0);
  parallel_for(N, opt.workers, [&](std::size_t i) {
    const CounterKey key{opt.seed, Stream::RealEta, static_cast<std::uint64_t>(m), i, 0};
    double x = g.central * (2.0 * uniform01(key, 0) - 1.0);
    for (std::int64_t k = 0;; ++k) {
      if (std::abs(x) < land) {
        landed[i] = 1;
        return;
      }
      if (k >= opt.horizon) return;
      const auto next = g(x);
      if (!next) return;
      x = *next;
    }
  });

  // 0 returned, 1 left the return domain, 2 censored
  std::vector<unsigned char> fate(N, 0);
  const double gap = xn - land;
  parallel_for(N, opt.workers, [&](std::size_t i) {
    const CounterKey key{opt.seed, Stream::RealXi, static_cast<std::uint64_t>(n), i, 0};
    const double t = 2.0 * gap * uniform01(key, 0);
    double x = t < gap ? -(land + t) : land + (t - gap);
    for (std::int64_t k = 1; k <= opt.horizon; ++k) {
      const auto next = g(x);
      if (!next) {
        fate[i] = 1;
        return;
      }
      x = *next;
      if (std::abs(x) < xn) return;
    }
    fate[i] = 2;
  });

  RealLevelStats s;
  s.m = m;
  s.n = n;
  std::int64_t hits = 0, never = 0, censored = 0;
  for (std::size_t i = 0; i < N; ++i) {
    hits += landed[i];
    never += fate[i] != 0;
    censored += fate[i] == 2;
  }
  s.eta = wilson_estimate(hits, opt.samples);
  s.xi = wilson_estimate(never, opt.samples);
  s.xi_censored_fraction = static_cast<double>(censored) / static_cast<double>(opt.samples);
  s.rho = land / nest.half_width(m + 1);
  return s;
}

Estimate wild_attractor_indicator(const RealUnimodalMap<double>& f, const PrincipalNest& nest, int level,
                                  std::int64_t samples, std::int64_t iterations, std::uint64_t seed,
                                  std::size_t workers) {
  if (samples <= 0) throw EmptySampleError("sample count must be positive");
  const double target = nest.half_width(level);
  const double lo = f(f.a), hi = f.a;
  std::vector<unsigned char> visit(static_cast<std::size_t>(samples), 0);
  parallel_for(visit.size(), workers, [&](std::size_t i) {
    const CounterKey key{seed, Stream::WildAttractor, static_cast<std::uint64_t>(level), i, 0};
    double x = lo + (hi - lo) * uniform01(key, 0);
    for (std::int64_t k = 0; k < iterations; ++k) {
      x = f(x);
      if (2 * k >= iterations && std::abs(x) < target) {
        visit[i] = 1;
        return;
      }
    }
  });
  std::int64_t count = 0;
  for (auto v : visit) count += v;
  return wilson_estimate(count, samples);
}

template struct RealUnimodalMap<double>;
template struct RealUnimodalMap<quad>;
template std::vector<Symbol> itinerary(const RealUnimodalMap<double>&, std::size_t);
template std::vector<Symbol> itinerary(const RealUnimodalMap<quad>&, std::size_t);
template double find_fibonacci_parameter(double, int, double);
template quad find_fibonacci_parameter(double, int, quad);
template std::vector<std::int64_t> closest_returns(const RealUnimodalMap<double>&, std::int64_t);
template std::vector<std::int64_t> closest_returns(const RealUnimodalMap<quad>&, std::int64_t);
template PrincipalNest build_principal_nest(const RealUnimodalMap<double>&, int);
template PrincipalNest build_principal_nest(const RealUnimodalMap<quad>&, int);

}  // namespace feigen
