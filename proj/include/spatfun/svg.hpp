#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "spatfun/csv.hpp"
#include "spatfun/errors.hpp"

namespace spatfun {

/// One polyline of an SVG line plot.
struct SvgSeries {
  std::string label;
  std::vector<double> xs;
  std::vector<double> ys;
};

/// Minimal self-contained SVG line-plot emitter: axes, ticks, polylines.
/// Log axes take log10 of the data before mapping.
inline void write_svg_lines(const std::string& path, const std::string& title,
                            const std::string& xlabel, const std::string& ylabel,
                            const std::vector<SvgSeries>& series, bool logx = false,
                            bool logy = false) {
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  const double width = 800, height = 500;
  const double ml = 70, mr = 20, mt = 40, mb = 55;

  auto tx = [&](double v) { return logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return logy ? std::log10(v) : v; };

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool first = true;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      const double x = tx(s.xs[i]), y = ty(s.ys[i]);
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (first) {
        xmin = xmax = x;
        ymin = ymax = y;
        first = false;
      } else {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
      }
    }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;

  auto px = [&](double x) { return ml + (tx(x) - xmin) / (xmax - xmin) * (width - ml - mr); };
  auto py = [&](double y) { return height - mb - (ty(y) - ymin) / (ymax - ymin) * (height - mt - mb); };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot open SVG output: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"16\">"
      << title << "</text>\n";

  // axes
  out << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
      << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
      << height - mb << "\" stroke=\"black\"/>\n";

  const int nticks = 5;
  for (int i = 0; i <= nticks; ++i) {
    const double fx = xmin + (xmax - xmin) * i / nticks;
    const double fy = ymin + (ymax - ymin) * i / nticks;
    const double sx = ml + (width - ml - mr) * i / nticks;
    const double sy = height - mb - (height - mt - mb) * i / nticks;
    const double vx = logx ? std::pow(10.0, fx) : fx;
    const double vy = logy ? std::pow(10.0, fy) : fy;
    out << "<line x1=\"" << sx << "\" y1=\"" << height - mb << "\" x2=\"" << sx << "\" y2=\""
        << height - mb + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << sx << "\" y=\"" << height - mb + 18
        << "\" text-anchor=\"middle\" font-size=\"11\">" << format_double(vx) << "</text>\n";
    out << "<line x1=\"" << ml - 5 << "\" y1=\"" << sy << "\" x2=\"" << ml << "\" y2=\"" << sy
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << ml - 8 << "\" y=\"" << sy + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << format_double(vy) << "</text>\n";
  }
  out << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-size=\"13\">" << xlabel << "</text>\n";
  out << "<text x=\"16\" y=\"" << (mt + height - mb) / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
      << (mt + height - mb) / 2 << ")\">" << ylabel << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[s].xs.size(); ++i) {
      if (!std::isfinite(tx(series[s].xs[i])) || !std::isfinite(ty(series[s].ys[i]))) continue;
      out << px(series[s].xs[i]) << ',' << py(series[s].ys[i]) << ' ';
    }
    out << "\"/>\n";
    if (!series[s].label.empty() && series.size() <= 10) {
      out << "<rect x=\"" << width - mr - 150 << "\" y=\"" << mt + 16 * s
          << "\" width=\"12\" height=\"3\" fill=\"" << color << "\"/>\n";
      out << "<text x=\"" << width - mr - 133 << "\" y=\"" << mt + 16 * s + 5
          << "\" font-size=\"11\">" << series[s].label << "</text>\n";
    }
  }
  out << "</svg>\n";
}

}  // namespace spatfun
