#include "dnaplan/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "dnaplan/error.hpp"

namespace dnaplan::diagnostics {

const char* to_string(Stability s) {
  switch (s) {
    case Stability::monotone_stable: return "monotone-stable";
    case Stability::late_oscillatory: return "late-oscillatory";
    case Stability::initial_regressive: return "initial-regressive";
    case Stability::non_convergent: return "non-convergent";
    case Stability::unclassified: return "unclassified";
  }
  return "unclassified";
}

GainSeries stepwise_gain(const DnaProfile& dna) {
  if (dna.size() < 2) {
    throw DomainError("stepwise_gain needs at least 2 grid points");
  }
  GainSeries s{dna.grid, std::vector<double>(dna.size() - 1)};
  for (std::size_t m = 0; m + 1 < dna.size(); ++m) s.gains[m] = dna.values[m + 1] - dna.values[m];
  return s;
}

StabilityReport classify(const GainSeries& series, const Thresholds& cfg) {
  const auto& g = series.gains;
  const auto& grid = series.grid;
  if (g.size() + 1 != grid.size() || g.empty()) {
    throw InvalidInput("gain series length must equal grid length - 1");
  }
  StabilityReport r;
  r.thresholds = cfg;

  double scale = 0.0;
  for (double x : g) scale = std::max(scale, std::abs(x));
  const std::size_t last = g.size() - 1;  // interval at the largest t
  r.first_gain_normalized = scale > 0.0 ? g[last] / scale : 0.0;

  // Negative-gain regions as maximal runs of intervals.
  for (std::size_t m = 0; m < g.size();) {
    if (!(g[m] < 0.0)) {
      ++m;
      continue;
    }
    std::size_t e = m;
    while (e + 1 < g.size() && g[e + 1] < 0.0) ++e;
    r.negative_gain_regions.emplace_back(grid[m], grid[e + 1]);
    m = e + 1;
  }

  double late_sum = 0.0, early_sum = 0.0;
  std::size_t late_n = 0, early_n = 0;
  int prev_sign = 0;
  for (std::size_t m = 0; m < g.size(); ++m) {
    const double mid = 0.5 * (grid[m] + grid[m + 1]);
    if (mid < cfg.t_late) {
      late_sum += g[m];
      ++late_n;
      const int sign = g[m] > 0.0 ? 1 : (g[m] < 0.0 ? -1 : 0);
      if (sign != 0) {
        if (prev_sign != 0 && sign != prev_sign) ++r.late_sign_changes;
        prev_sign = sign;
      }
    } else {
      early_sum += g[m];
      ++early_n;
    }
  }
  r.late_mean_gain = late_n ? late_sum / static_cast<double>(late_n) : 0.0;
  r.early_mean_gain = early_n ? early_sum / static_cast<double>(early_n) : 0.0;

  const bool regressive = r.first_gain_normalized < -cfg.tau_neg;
  const bool non_convergent =
      late_n > 0 && early_n > 0 && r.late_mean_gain > 0.0 && r.late_mean_gain > cfg.kappa * r.early_mean_gain;
  const bool oscillatory = r.late_sign_changes >= cfg.n_osc;
  bool monotone = scale > 0.0;
  for (std::size_t m = 0; m < g.size() && monotone; ++m) {
    if (!(g[m] > 0.0)) monotone = false;
    // Along decreasing t the gain must not grow: g[m] <= g[m+1].
    if (m + 1 < g.size() && g[m] > g[m + 1] + cfg.monotone_tol * scale) monotone = false;
  }

  if (regressive) {
    r.label = Stability::initial_regressive;
  } else if (non_convergent) {
    r.label = Stability::non_convergent;
  } else if (oscillatory) {
    r.label = Stability::late_oscillatory;
  } else if (monotone) {
    r.label = Stability::monotone_stable;
  } else {
    r.label = Stability::unclassified;
  }

  // Skip a leading run of regressive steps at the noise end and a trailing
  // one at the data end.
  std::size_t start = grid.size() - 1;
  while (start >= 1 && g[start - 1] < 0.0) --start;
  std::size_t stop = 0;
  while (stop + 1 < start && g[stop] < 0.0) ++stop;
  r.suggested_start = grid[start];
  r.suggested_stop = grid[stop];
  if (start == 0) {  // every step regresses; keep the full span
    r.suggested_start = grid.back();
    r.suggested_stop = grid.front();
  }
  return r;
}

}  // namespace dnaplan::diagnostics
