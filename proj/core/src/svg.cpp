#include "dislocore/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace dislocore {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string svg_loglog(const std::string& title, const std::string& xlabel,
                       const std::string& ylabel, const std::vector<PlotSeries>& series,
                       const std::vector<GuideLine>& guides) {
  const double W = 640, H = 480;
  const double ml = 70, mr = 20, mt = 40, mb = 55;

  double xmin = std::numeric_limits<double>::infinity(), xmax = 0;
  double ymin = xmin, ymax = 0;
  for (const auto& s : series)
    for (const auto& [x, y] : s.xy) {
      if (x <= 0 || y <= 0) continue;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (!(xmax > 0) || !(ymax > 0)) {
    xmin = ymin = 0.1;
    xmax = ymax = 10.0;
  }
  const double lx0 = std::floor(std::log10(xmin)), lx1 = std::ceil(std::log10(xmax * 1.0001));
  const double ly0 = std::floor(std::log10(ymin)), ly1 = std::ceil(std::log10(ymax * 1.0001));

  auto X = [&](double x) { return ml + (std::log10(x) - lx0) / std::max(1.0, lx1 - lx0) * (W - ml - mr); };
  auto Y = [&](double y) { return H - mb - (std::log10(y) - ly0) / std::max(1.0, ly1 - ly0) * (H - mt - mb); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" "
       "font-family=\"sans-serif\">" << title << "</text>\n";

  // Decade grid and tick labels.
  for (int e = static_cast<int>(lx0); e <= static_cast<int>(lx1); ++e) {
    const double px = X(std::pow(10.0, e));
    o << "<line x1=\"" << num(px) << "\" y1=\"" << mt << "\" x2=\"" << num(px) << "\" y2=\""
      << H - mb << "\" stroke=\"#dddddd\"/>\n";
    o << "<text x=\"" << num(px) << "\" y=\"" << H - mb + 18
      << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">1e" << e
      << "</text>\n";
  }
  for (int e = static_cast<int>(ly0); e <= static_cast<int>(ly1); ++e) {
    const double py = Y(std::pow(10.0, e));
    o << "<line x1=\"" << ml << "\" y1=\"" << num(py) << "\" x2=\"" << W - mr << "\" y2=\""
      << num(py) << "\" stroke=\"#dddddd\"/>\n";
    o << "<text x=\"" << ml - 6 << "\" y=\"" << num(py + 4)
      << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">1e" << e
      << "</text>\n";
  }
  o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\""
    << H - mt - mb << "\" fill=\"none\" stroke=\"#444444\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
    << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">" << xlabel
    << "</text>\n";
  o << "<text x=\"18\" y=\"" << H / 2
    << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" transform=\"rotate(-90 18 "
    << H / 2 << ")\">" << ylabel << "</text>\n";

  for (const auto& g : guides) {
    const double xa = std::pow(10.0, lx0), xb = std::pow(10.0, lx1);
    const double ya = g.y0 * std::pow(xa / g.x0, g.slope);
    const double yb = g.y0 * std::pow(xb / g.x0, g.slope);
    o << "<line x1=\"" << num(X(xa)) << "\" y1=\"" << num(Y(ya)) << "\" x2=\"" << num(X(xb))
      << "\" y2=\"" << num(Y(yb)) << "\" stroke=\"#888888\" stroke-dasharray=\"6,4\"/>\n";
    if (!g.label.empty())
      o << "<text x=\"" << num(X(g.x0) + 6) << "\" y=\"" << num(Y(g.y0) - 6)
        << "\" font-size=\"11\" fill=\"#666666\" font-family=\"sans-serif\">" << g.label
        << "</text>\n";
  }

  double legend_y = mt + 16;
  for (const auto& s : series) {
    if (s.line) {
      o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.8\" opacity=\""
        << s.opacity << "\" points=\"";
      for (const auto& [x, y] : s.xy)
        if (x > 0 && y > 0) o << num(X(x)) << "," << num(Y(y)) << " ";
      o << "\"/>\n";
    } else {
      for (const auto& [x, y] : s.xy)
        if (x > 0 && y > 0)
          o << "<circle cx=\"" << num(X(x)) << "\" cy=\"" << num(Y(y))
            << "\" r=\"1.6\" fill=\"" << s.color << "\" opacity=\"" << s.opacity << "\"/>\n";
    }
    if (!s.label.empty()) {
      o << "<rect x=\"" << W - mr - 150 << "\" y=\"" << legend_y - 9
        << "\" width=\"10\" height=\"10\" fill=\"" << s.color << "\"/>\n";
      o << "<text x=\"" << W - mr - 135 << "\" y=\"" << legend_y
        << "\" font-size=\"11\" font-family=\"sans-serif\">" << s.label << "</text>\n";
      legend_y += 16;
    }
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace dislocore
