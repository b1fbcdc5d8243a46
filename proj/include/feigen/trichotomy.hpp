#pragma once

#include <optional>
#include <string>
#include <vector>

#include "feigen/statistics.hpp"

namespace feigen {

enum class BoundKind { P, Q };

// x -> a + b x + c x^2
struct QuadraticBound {
  double a = 0.0, b = 0.0, c = 0.0;
  BoundKind kind = BoundKind::P;
  double delta = 2.0;
  double calibration_C = 1.0;
  bool linear_clamped = false;  // b was negative and clamped to 0

  double operator()(double x) const { return a + x * (b + c * x); }
  bool is_identity() const { return a == 0.0 && b == 1.0 && c == 0.0; }
};

// Smallest x > 0 with q(x) = x; none when there is no positive root or when
// q is the identity.
std::optional<double> smallest_positive_fixed_point(const QuadraticBound& q);

QuadraticBound build_P(double eta, double xi, double rho, double C);
QuadraticBound build_Q(double eta, double xi, double rho, double tau, double upsilon, double delta, double C);

// x_0 = 0, x_{k+1} = q(x_k)
std::vector<double> iterate_from_zero(const QuadraticBound& q, int steps);

enum class Regime { Lean, Balanced, BlackHole, Inconclusive };

const char* to_string(Regime r);

struct TrichotomyVerdict {
  Regime regime = Regime::Inconclusive;
  LinearFit eta_fit;          // log eta_m against m
  LinearFit xi_fit;           // log xi_m against m
  LinearFit inverse_eta_fit;  // 1 / eta_m against m
  std::vector<double> ratio_log;  // log(eta_m / xi_m)
  double calibration_C = 10.0;
  std::string notes;
};

// Sequences are indexed m = 1, 2, ...; fits drop the first level.
TrichotomyVerdict classify(const std::vector<double>& eta, const std::vector<double>& xi, double C = 10.0);

struct LevelQuantities {
  int m = 0;
  double eta = 0.0, xi = 0.0, rho = 0.0, omega = 0.0;
};

struct OmegaConsistencyRow {
  int m = 0;
  double zero_area_ratio = 0.0;  // omega_m xi_m rho_m / eta_m
  bool zero_area_flag = false;
  std::optional<double> square_ratio;  // omega_{2m} / omega_m^2
  bool square_flag = false;
};

struct OmegaConsistencyReport {
  std::vector<OmegaConsistencyRow> rows;
  int flagged = 0;
};

OmegaConsistencyReport omega_consistency_report(const std::vector<LevelQuantities>& levels);

struct ThetaFit {
  double theta = 1.0;
  LinearFit fit;
};

// Fits log(eta_m xi_m / (eta_m + xi_m)^2) against m.
ThetaFit theta_bound_fit(const std::vector<double>& eta, const std::vector<double>& xi);

}  // namespace feigen
