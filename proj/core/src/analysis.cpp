#include "dislocore/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dislocore {

namespace {

FitResult loglog_fit(const std::vector<std::pair<double, double>>& xy) {
  FitResult fit;
  fit.points_used = static_cast<int>(xy.size());
  if (xy.size() < 2) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : xy) {
    const double lx = std::log10(x), ly = std::log10(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(xy.size());
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

}  // namespace

DecaySeries decay_envelope(const std::vector<DecayPoint>& points, double r_min, double r_max,
                           int bins) {
  if (!(r_max > r_min) || r_min <= 0.0)
    throw std::invalid_argument("decay_envelope: need 0 < r_min < r_max");
  if (bins < 2) throw std::invalid_argument("decay_envelope: need at least two bins");

  DecaySeries out;
  out.points = points;
  out.r_min = r_min;
  out.r_max = r_max;

  const double lmin = std::log(r_min), lmax = std::log(r_max);
  const double width = (lmax - lmin) / bins;
  std::vector<EnvelopeBin> raw(static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b)
    raw[b].center = std::exp(lmin + (b + 0.5) * width);

  for (const DecayPoint& p : points) {
    if (p.r < r_min || p.r > r_max || p.mag <= 0.0) continue;
    int b = static_cast<int>((std::log(p.r) - lmin) / width);
    b = std::clamp(b, 0, bins - 1);
    EnvelopeBin& bin = raw[static_cast<std::size_t>(b)];
    bin.max_mag = std::max(bin.max_mag, p.mag);
    bin.mean_mag += p.mag;
    ++bin.count;
  }

  for (auto& bin : raw) {
    if (bin.count > 0) {
      bin.mean_mag /= bin.count;
      out.bins.push_back(bin);
    } else {
      ++out.merged_bins;  // empty bin folded into its neighbor
    }
  }

  std::vector<std::pair<double, double>> env, mean;
  for (const auto& bin : out.bins) {
    env.emplace_back(bin.center, bin.max_mag);
    mean.emplace_back(bin.center, bin.mean_mag);
  }
  out.fit_max = loglog_fit(env);
  out.fit_mean = loglog_fit(mean);
  return out;
}

ConvergenceTable to_table(const SupercellStudy& study) {
  ConvergenceTable t;
  t.rows = study.rows;
  std::vector<StudyRow> sorted = t.rows;
  std::sort(sorted.begin(), sorted.end(),
            [](const StudyRow& a, const StudyRow& b) { return a.R < b.R; });
  for (std::size_t k = 1; k < sorted.size(); ++k)
    if (sorted[k].h1_error > sorted[k - 1].h1_error) t.monotone = false;
  return t;
}

FitResult fit_rate(const ConvergenceTable& table) {
  std::vector<std::pair<double, double>> xy;
  for (const StudyRow& row : table.rows)
    if (row.converged && row.h1_error > 0.0) xy.emplace_back(row.R, row.h1_error);
  if (xy.size() < 3)
    throw std::invalid_argument("fit_rate: need at least three converged rows");
  return loglog_fit(xy);
}

DisplacementField remainder_field(const DisplacementField& u, const Predictor& pred,
                                  int through_level) {
  if (through_level < 0 || through_level > 2)
    throw std::invalid_argument("remainder level must be 0, 1 or 2");
  DisplacementField out = u;
  if (through_level == 0) return out;
  const Domain& dom = *u.domain;
  for (std::int32_t k = 0; k < dom.size(); ++k) {
    const Eigen::Vector2d pos = dom.spec.position(dom.sites[static_cast<std::size_t>(k)]);
    double sub = pred.correction(pos, 1);
    if (through_level >= 2) sub += pred.correction(pos, 2);
    out.values[k] -= sub;
  }
  return out;
}

}  // namespace dislocore
