#include "feigen/trichotomy.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "feigen/errors.hpp"

namespace feigen {

std::optional<double> smallest_positive_fixed_point(const QuadraticBound& q) {
  if (q.is_identity()) return std::nullopt;
  // c x^2 + (b - 1) x + a = 0
  const double A = q.c, B = q.b - 1.0, Cc = q.a;
  std::vector<double> roots;
  if (A == 0.0) {
    if (B != 0.0) roots.push_back(-Cc / B);
  } else {
    const double disc = B * B - 4.0 * A * Cc;
    if (disc < 0.0) return std::nullopt;
    const double s = std::sqrt(disc);
    const double t = -0.5 * (B + std::copysign(s, B));
    if (t != 0.0) {
      roots.push_back(t / A);
      roots.push_back(Cc / t);
    } else {
      roots.push_back(0.0);
    }
  }
  std::optional<double> best;
  for (double r : roots)
    if (r > 0.0 && std::isfinite(r) && (!best || r < *best)) best = r;
  return best;
}

namespace {

void check_inputs(double eta, double xi, double rho, double C) {
  for (double v : {eta, xi, rho, C})
    if (!std::isfinite(v) || v < 0.0) throw PreconditionError("bound inputs must be finite and nonnegative");
  if (C < 1.0) throw PreconditionError("calibration constant must be >= 1");
  if (rho == 0.0) throw DegenerateError("rho = 0 makes the bound undefined");
}

}  // namespace

QuadraticBound build_P(double eta, double xi, double rho, double C) {
  check_inputs(eta, xi, rho, C);
  QuadraticBound q;
  q.kind = BoundKind::P;
  q.calibration_C = C;
  q.a = C * eta / rho;
  q.b = 1.0 - (eta + xi) / C + C * eta * xi;
  if (q.b < 0.0) {
    q.b = 0.0;
    q.linear_clamped = true;
  }
  q.c = C * xi * rho;
  return q;
}

QuadraticBound build_Q(double eta, double xi, double rho, double tau, double upsilon, double delta, double C) {
  check_inputs(eta, xi, rho, C);
  if (!(tau > 0.0) || !(upsilon > 0.0)) throw PreconditionError("tau and upsilon must be positive");
  if (!(delta <= 2.0)) throw PreconditionError("delta must not exceed 2");
  const double e = 2.0 - delta;
  QuadraticBound q;
  q.kind = BoundKind::Q;
  q.delta = delta;
  q.calibration_C = C;
  q.a = std::pow(tau, e) * eta / (C * rho);
  const double discount = 1.0 - C * (eta + xi);
  q.linear_clamped = discount < 0.0;
  q.b = std::max(discount, 0.0) + std::pow(tau * upsilon, e) * eta * xi / C;
  q.c = C * std::pow(upsilon, e) * xi * rho;
  return q;
}

std::vector<double> iterate_from_zero(const QuadraticBound& q, int steps) {
  std::vector<double> xs{0.0};
  for (int k = 0; k < steps; ++k) xs.push_back(q(xs.back()));
  return xs;
}

const char* to_string(Regime r) {
  switch (r) {
    case Regime::Lean: return "Lean";
    case Regime::Balanced: return "Balanced";
    case Regime::BlackHole: return "BlackHole";
    default: return "Inconclusive";
  }
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

bool decays_exponentially(const LinearFit& f) { return f.r_squared >= 0.9 && f.slope < -0.1; }

// Growth across the fitted range must stand above round-off in the values.
bool grows(const LinearFit& f, const std::vector<double>& x, const std::vector<double>& y) {
  const double span = (x.back() - x.front()) * f.slope;
  const double scale = *std::max_element(y.begin(), y.end());
  return f.slope > 0.0 && span > 1e-6 * scale;
}

}  // namespace

TrichotomyVerdict classify(const std::vector<double>& eta, const std::vector<double>& xi, double C) {
  if (eta.size() != xi.size()) throw PreconditionError("eta and xi must have equal length");
  if (eta.size() < 4) throw PreconditionError("classification needs at least 4 levels");
  if (!(C >= 1.0)) throw PreconditionError("calibration constant must be >= 1");
  for (std::size_t i = 0; i < eta.size(); ++i)
    for (double v : {eta[i], xi[i]})
      if (!std::isfinite(v) || v <= 0.0 || v > 1.0)
        throw DomainError(fmt::format("entry {} at level {} is outside (0, 1]", v, i + 1));

  TrichotomyVerdict out;
  out.calibration_C = C;
  std::vector<double> m, log_eta, log_xi, inv_eta;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    out.ratio_log.push_back(std::log(eta[i] / xi[i]));
    if (i == 0) continue;  // transient level
    m.push_back(static_cast<double>(i + 1));
    log_eta.push_back(std::log(eta[i]));
    log_xi.push_back(std::log(xi[i]));
    inv_eta.push_back(1.0 / eta[i]);
  }
  out.eta_fit = fit_line(m, log_eta);
  out.xi_fit = fit_line(m, log_xi);
  out.inverse_eta_fit = fit_line(m, inv_eta);

  bool lean_trigger = false, hole_trigger = false;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    lean_trigger = lean_trigger || eta[i] < xi[i] / C;
    hole_trigger = hole_trigger || eta[i] > C * xi[i];
  }
  const bool xi_floor = *std::min_element(xi.begin(), xi.end()) >= 0.5 * median(xi);
  const bool eta_floor = *std::min_element(eta.begin(), eta.end()) >= 0.5 * median(eta);
  const double logC = std::log(C);
  const bool in_band = std::all_of(out.ratio_log.begin(), out.ratio_log.end(),
                                   [&](double r) { return std::abs(r) <= logC; });

  if (lean_trigger && decays_exponentially(out.eta_fit) && xi_floor) {
    out.regime = Regime::Lean;
  } else if (hole_trigger && decays_exponentially(out.xi_fit) && eta_floor) {
    out.regime = Regime::BlackHole;
  } else if (in_band && out.inverse_eta_fit.r_squared >= 0.9 && grows(out.inverse_eta_fit, m, inv_eta)) {
    out.regime = Regime::Balanced;
  } else {
    out.regime = Regime::Inconclusive;
    out.notes = fmt::format("lean trigger {}, black-hole trigger {}, ratio band {}, 1/eta fit R2 {:.3f}",
                            lean_trigger, hole_trigger, in_band, out.inverse_eta_fit.r_squared);
  }
  return out;
}

OmegaConsistencyReport omega_consistency_report(const std::vector<LevelQuantities>& levels) {
  std::map<int, const LevelQuantities*> by_level;
  for (const auto& q : levels) by_level[q.m] = &q;
  OmegaConsistencyReport rep;
  bool any_pair = false;
  auto out_of_band = [](double v) { return !(v >= 1e-2 && v <= 1e2); };
  for (const auto& [m, q] : by_level) {
    OmegaConsistencyRow row;
    row.m = m;
    row.zero_area_ratio = q->omega * q->xi * q->rho / q->eta;
    row.zero_area_flag = out_of_band(row.zero_area_ratio);
    if (m > 0) {
      if (auto it = by_level.find(2 * m); it != by_level.end()) {
        any_pair = true;
        row.square_ratio = it->second->omega / (q->omega * q->omega);
        row.square_flag = out_of_band(*row.square_ratio);
      }
    }
    rep.flagged += row.zero_area_flag + row.square_flag;
    rep.rows.push_back(row);
  }
  if (!any_pair) throw PairError("no doubling pair (m, 2m) among the supplied levels");
  return rep;
}

ThetaFit theta_bound_fit(const std::vector<double>& eta, const std::vector<double>& xi) {
  if (eta.size() != xi.size()) throw PreconditionError("eta and xi must have equal length");
  if (eta.size() < 4) throw PreconditionError("theta fit needs at least 4 levels");
  std::vector<double> m, y;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    const double s = eta[i] + xi[i];
    m.push_back(static_cast<double>(i + 1));
    y.push_back(std::log(eta[i] * xi[i] / (s * s)));
  }
  ThetaFit out;
  out.fit = fit_line(m, y);
  out.theta = std::exp(out.fit.slope);
  return out;
}

}  // namespace feigen
