#pragma once

#include <string>
#include <vector>

namespace dislocore {

struct PlotSeries {
  std::string label;
  std::string color = "#3366cc";
  bool line = false;       // false: scatter dots
  double opacity = 1.0;
  std::vector<std::pair<double, double>> xy;
};

/// Reference power law drawn as a dashed guide line anchored at (x0, y0).
struct GuideLine {
  double slope = -1.0;
  double x0 = 10.0, y0 = 1e-3;
  std::string label;
};

/// Minimal self-contained log-log scatter/line plot.
std::string svg_loglog(const std::string& title, const std::string& xlabel,
                       const std::string& ylabel, const std::vector<PlotSeries>& series,
                       const std::vector<GuideLine>& guides = {});

}  // namespace dislocore
