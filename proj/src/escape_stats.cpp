#include "feigen/escape_stats.hpp"

#include <algorithm>

namespace feigen {

namespace {

// a / b with 0 / 0 read as 0
double safe_div(double a, double b) {
  if (a == 0.0) return 0.0;
  return b > 0.0 ? a / b : std::numeric_limits<double>::infinity();
}

}  // namespace

ExpLemmaReport verify_exp_lemma(const std::vector<LevelStats>& stats, double c_max) {
  if (stats.size() < 3) throw PreconditionError("verify_exp_lemma needs at least 3 consecutive levels");
  for (std::size_t i = 1; i < stats.size(); ++i) {
    if (stats[i].m != stats[0].m) throw PreconditionError("verify_exp_lemma needs a fixed m");
    if (stats[i].n != stats[i - 1].n + 1) throw PreconditionError("verify_exp_lemma needs consecutive n");
  }
  ExpLemmaReport report;
  for (std::size_t i = 0; i + 1 < stats.size(); ++i) {
    const Estimate& a = stats[i].eta;
    const Estimate& b = stats[i + 1].eta;
    const Estimate& xi = stats[i].xi;
    ExpLemmaRow row;
    row.n = stats[i].n;
    row.xi = xi.value;
    row.ratio = safe_div(b.value, a.value);
    row.ratio_low = safe_div(b.ci_low, a.ci_high);
    row.ratio_high = std::min(1.0, safe_div(b.ci_high, a.ci_low));
    row.c_min = std::max(1.0, safe_div(xi.ci_low, 1.0 - row.ratio_low));
    row.c0_min = std::max({1.0, safe_div(1.0, row.ratio_high), safe_div(1.0 - row.ratio_high, xi.ci_high)});
    report.c = std::max(report.c, row.c_min);
    report.c0 = std::max(report.c0, row.c0_min);
    report.rows.push_back(row);
  }
  report.feasible = std::isfinite(report.c) && std::isfinite(report.c0) && report.c <= c_max && report.c0 <= c_max;
  return report;
}

}  // namespace feigen
