#include "feigen/poincare.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <fmt/format.h>

#include "feigen/parallel.hpp"
#include "feigen/random.hpp"

namespace feigen {

namespace {

struct Child {
  cplx point;
  double log_deriv;  // log |D(step)| at point
};

using PreimageStep = std::function<std::vector<Child>(cplx)>;

struct TreeTally {
  std::vector<double> level_mass;
  std::vector<double> discarded;  // discarded weight per depth
  double growth = 0.0;            // max children weight / parent weight
  std::int64_t nodes = 0;
};

struct Node {
  cplx point;
  double log_deriv;
  int depth;
};

void walk(const Node& root, int depth, double delta, double prune_eps, const PreimageStep& step, TreeTally& t) {
  std::vector<Node> stack{root};
  while (!stack.empty()) {
    const Node node = stack.back();
    stack.pop_back();
    const double weight = std::exp(-delta * node.log_deriv);
    if (weight < prune_eps) {
      t.discarded[static_cast<std::size_t>(node.depth)] += weight;
      continue;
    }
    t.level_mass[static_cast<std::size_t>(node.depth)] += weight;
    ++t.nodes;
    if (node.depth == depth) continue;
    const auto children = step(node.point);
    double child_mass = 0.0;
    // push in reverse so the first preimage is expanded first
    for (auto it = children.rbegin(); it != children.rend(); ++it) {
      const Node c{it->point, node.log_deriv + it->log_deriv, node.depth + 1};
      child_mass += std::exp(-delta * c.log_deriv);
      stack.push_back(c);
    }
    if (weight > 0.0) t.growth = std::max(t.growth, child_mass / weight);
  }
}

SeriesAccount tree_series(cplx z, double delta, int depth, double prune_eps, const PreimageStep& step,
                          std::size_t workers) {
  if (depth < 0) throw PreconditionError("series depth must be nonnegative");
  if (!(delta >= 0.0)) throw PreconditionError("delta must be nonnegative");
  if (!(prune_eps >= 0.0)) throw PreconditionError("prune_eps must be nonnegative");

  const auto levels = static_cast<std::size_t>(depth) + 1;
  TreeTally total{std::vector<double>(levels, 0.0), std::vector<double>(levels, 0.0), 0.0, 0};
  total.level_mass[0] = 1.0;
  total.nodes = 1;
  if (depth > 0) {
    const auto first = step(z);
    std::vector<TreeTally> tallies(first.size(),
                                   TreeTally{std::vector<double>(levels, 0.0), std::vector<double>(levels, 0.0), 0.0, 0});
    parallel_for(first.size(), workers, [&](std::size_t i) {
      walk(Node{first[i].point, first[i].log_deriv, 1}, depth, delta, prune_eps, step, tallies[i]);
    });
    double child_mass = 0.0;
    for (const auto& c : first) child_mass += std::exp(-delta * c.log_deriv);
    total.growth = child_mass;
    for (const auto& t : tallies) {
      for (std::size_t j = 0; j < levels; ++j) {
        total.level_mass[j] += t.level_mass[j];
        total.discarded[j] += t.discarded[j];
      }
      total.growth = std::max(total.growth, t.growth);
      total.nodes += t.nodes;
    }
  }

  SeriesAccount acc;
  acc.delta = delta;
  acc.base_point = z;
  acc.depth = depth;
  acc.level_mass = total.level_mass;
  acc.nodes_visited = total.nodes;
  double s = 0.0;
  for (double mass : acc.level_mass) {
    s += mass;
    acc.partial_sums.push_back(s);
  }
  const double G = std::max(1.0, total.growth);
  for (std::size_t j = 0; j < levels; ++j)
    if (total.discarded[j] > 0.0) acc.pruned_mass_bound += total.discarded[j] * std::pow(G, depth - static_cast<int>(j));
  return acc;
}

PreimageStep plain_step(const FamilyMap& map) {
  return [map](cplx w) {
    std::vector<Child> out;
    for (cplx p : preimages(map, w)) {
      const double dp = std::abs(map.derivative(p));
      if (dp == 0.0) throw SingularPointError("preimage tree reaches the critical point");
      out.push_back({p, std::log(dp)});
    }
    return out;
  };
}

// Preimages under the level-m return map restricted to its branch around 0:
// intermediate pullbacks follow the critical orbit, the last one keeps
// every preimage in V^m.
PreimageStep return_branch_step(const DomainNest& nest, int m) {
  const FamilyMap map = nest.map();
  const std::int64_t P = nest.level(m).period;
  std::vector<cplx> orbit{cplx(0.0)};
  for (std::int64_t j = 1; j < P; ++j) orbit.push_back(map(orbit.back()));
  const double rm = nest.radius(m);
  return [map, orbit, P, rm](cplx w) {
    double log_deriv = 0.0;
    for (std::int64_t j = P - 1; j >= 1; --j) {
      const auto pre = preimages(map, w);
      const cplx target = orbit[static_cast<std::size_t>(j)];
      w = *std::min_element(pre.begin(), pre.end(),
                            [&](cplx a, cplx b) { return std::abs(a - target) < std::abs(b - target); });
      log_deriv += std::log(std::abs(map.derivative(w)));
    }
    std::vector<Child> out;
    for (cplx p : preimages(map, w)) {
      if (!(std::abs(p) < rm)) continue;
      const double dp = std::abs(map.derivative(p));
      if (dp == 0.0) throw SingularPointError("sample lies on the critical value of the return map");
      out.push_back({p, log_deriv + std::log(dp)});
    }
    return out;
  };
}

}  // namespace

SeriesAccount poincare_partial_sums(const FamilyMap& map, cplx z, double delta, int depth, double prune_eps,
                                    std::size_t workers) {
  return tree_series(z, delta, depth, prune_eps, plain_step(map), workers);
}

double closed_form_c0(double r, double delta, int depth) {
  if (!(r > 1.0)) throw PreconditionError("closed_form_c0 needs r > 1");
  double s = 0.0;
  for (int n = 0; n <= depth; ++n)
    s += std::pow(std::pow(2.0, 1.0 - delta), n) * std::pow(r, -delta * (1.0 - std::ldexp(1.0, -n)));
  return s;
}

const char* to_string(SeriesVerdict v) {
  switch (v) {
    case SeriesVerdict::Converging: return "Converging";
    case SeriesVerdict::Diverging: return "Diverging";
    default: return "Undecided";
  }
}

DivergenceDiagnostic divergence_diagnostic(const SeriesAccount& account, double eps_slope) {
  if (account.depth < 8) throw PreconditionError("divergence diagnostic needs depth >= 8");
  std::vector<double> x, y;
  for (int j = std::max(1, account.depth / 2); j <= account.depth; ++j) {
    const double mass = account.level_mass[static_cast<std::size_t>(j)];
    if (mass <= 0.0) continue;
    x.push_back(j);
    y.push_back(std::log(mass));
  }
  DivergenceDiagnostic out;
  if (x.size() < 2) {
    // every branch pruned: the tail is negligible
    out.verdict = SeriesVerdict::Converging;
    out.growth = 0.0;
    return out;
  }
  out.fit = fit_line(x, y);
  out.growth = std::exp(out.fit.slope);
  if (out.fit.slope > eps_slope) out.verdict = SeriesVerdict::Diverging;
  else if (out.fit.slope < -eps_slope) out.verdict = SeriesVerdict::Converging;
  return out;
}

DeltaBracket bound_delta_cr(const FamilyMap& map, cplx z, int depth, const std::vector<double>& delta_grid,
                            double prune_eps, std::size_t workers) {
  if (delta_grid.empty()) throw PreconditionError("empty delta grid");
  if (!std::is_sorted(delta_grid.begin(), delta_grid.end())) throw PreconditionError("delta grid must be sorted");
  if (delta_grid.front() < 0.0 || delta_grid.back() > 2.5) throw PreconditionError("delta grid must lie in [0, 2.5]");

  DeltaBracket b;
  for (double delta : delta_grid) {
    const auto acc = poincare_partial_sums(map, z, delta, depth, prune_eps, workers);
    b.verdicts.emplace_back(delta, divergence_diagnostic(acc).verdict);
  }
  const bool any_decided = std::any_of(b.verdicts.begin(), b.verdicts.end(),
                                       [](const auto& p) { return p.second != SeriesVerdict::Undecided; });
  if (!any_decided) throw InconclusiveError("every grid point is Undecided");

  b.high = delta_grid.back();
  b.high_is_grid_ceiling = true;
  for (const auto& [delta, v] : b.verdicts)
    if (v == SeriesVerdict::Converging) {
      b.high = delta;
      b.high_is_grid_ceiling = false;
      break;
    }
  b.low = delta_grid.front();
  b.low_is_grid_floor = true;
  for (const auto& [delta, v] : b.verdicts)
    if (v == SeriesVerdict::Diverging && delta <= b.high) {
      b.low = delta;
      b.low_is_grid_floor = false;
    }
  return b;
}

OmegaEstimate estimate_omega(const DomainNest& nest, int m, int n, double delta, std::int64_t annulus_samples,
                             int depth, double prune_eps, std::uint64_t seed, std::size_t workers) {
  if (!(0 <= m && m < n && n <= nest.depth())) throw PreconditionError("estimate_omega needs 0 <= m < n <= depth");
  if (annulus_samples < 1) throw EmptySampleError("estimate_omega needs at least one sample");
  const PreimageStep step = return_branch_step(nest, m);
  const double rn = nest.radius(n);
  const auto K = static_cast<std::size_t>(annulus_samples);
  std::vector<double> values(K, 0.0);
  std::vector<std::int64_t> retries(K, 0);
  parallel_for(K, workers, [&](std::size_t i) {
    for (std::uint64_t attempt = 0; attempt < 1u << 20; ++attempt) {
      const CounterKey key{seed, Stream::Omega, static_cast<std::uint64_t>(n), i, attempt};
      const cplx x = rn * unit_disk_point(key);
      if (nest.membership(n, x) != Region::InAnnulus) continue;
      try {
        values[i] = tree_series(x, delta, depth, prune_eps, step, 1).partial_sums.back();
        return;
      } catch (const SingularPointError&) {
        ++retries[i];
      }
    }
    throw DegenerateAreaError("could not sample the annulus");
  });
  OmegaEstimate out;
  out.omega = mean_estimate(values);
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  out.spread = *hi / *lo;
  for (auto r : retries) out.resampled += r;
  return out;
}

}  // namespace feigen
