#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dnaplan/dna.hpp"

namespace dnaplan::diagnostics {

/// gains[m] = C(t_{m+1}) - C(t_m): error removed when stepping down across the
/// m-th grid interval. Positive means denoising made progress.
struct GainSeries {
  TimeGrid grid;
  std::vector<double> gains;
};

enum class Stability {
  monotone_stable,
  late_oscillatory,
  initial_regressive,
  non_convergent,
  unclassified,
};

const char* to_string(Stability s);

struct Thresholds {
  double tau_neg = 0.01;   // on gains divided by max |gain|
  double t_late = 0.4;     // late window: interval midpoints below this
  std::size_t n_osc = 3;   // sign changes inside the late window
  double kappa = 0.5;      // late mean gain / early mean gain
  double monotone_tol = 1e-9;  // relative to max |gain|
};

struct StabilityReport {
  Stability label = Stability::unclassified;
  std::vector<std::pair<double, double>> negative_gain_regions;  // [t_lo, t_hi]
  double suggested_start = 0.0;
  double suggested_stop = 0.0;
  // Supporting numbers.
  double first_gain_normalized = 0.0;
  std::size_t late_sign_changes = 0;
  double late_mean_gain = 0.0;
  double early_mean_gain = 0.0;
  Thresholds thresholds;
};

GainSeries stepwise_gain(const DnaProfile& dna);

StabilityReport classify(const GainSeries& series, const Thresholds& cfg = {});

}  // namespace dnaplan::diagnostics
