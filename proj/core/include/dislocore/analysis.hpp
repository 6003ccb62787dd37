#pragma once

#include <vector>

#include "dislocore/energy.hpp"
#include "dislocore/predictor.hpp"
#include "dislocore/solve.hpp"

namespace dislocore {

struct EnvelopeBin {
  double center = 0.0;
  double max_mag = 0.0;
  double mean_mag = 0.0;
  int count = 0;
};

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;  // log10 scale
  int points_used = 0;
};

/// Per-log-bin maxima of (r, magnitude) samples with least-squares slopes on
/// the log-log envelope. Bins left empty are merged into their neighbors.
struct DecaySeries {
  std::vector<DecayPoint> points;
  std::vector<EnvelopeBin> bins;
  FitResult fit_max;
  FitResult fit_mean;
  double r_min = 0.0, r_max = 0.0;
  int merged_bins = 0;
};

DecaySeries decay_envelope(const std::vector<DecayPoint>& points, double r_min, double r_max,
                           int bins);

struct ConvergenceTable {
  std::vector<StudyRow> rows;
  bool monotone = true;
};

ConvergenceTable to_table(const SupercellStudy& study);

/// Log-log least-squares rate of h1_error vs R over converged rows.
/// Requires at least three usable rows.
FitResult fit_rate(const ConvergenceTable& table);

/// Subtract the analytic corrections (levels 1..through_level) sampled at the
/// sites from a solved corrector, so decay can be compared across predictor
/// orders.
DisplacementField remainder_field(const DisplacementField& u, const Predictor& pred,
                                  int through_level);

}  // namespace dislocore
