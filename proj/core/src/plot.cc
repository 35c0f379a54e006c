/*
 * Copyright 2026 The fedspike Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fedspike/plot.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "fedspike/error.h"

namespace fedspike {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#ff7f0e", "#9467bd", "#8c564b"};

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string Fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string Coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string RenderSvg(std::span<const SeriesSummary> series,
                      const PlotOptions& options) {
  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo, y_lo = x_lo, y_hi = -x_lo;
  for (const auto& s : series) {
    if (s.x.size() != s.mean.size()) {
      throw InvalidArgument("series '" + s.method + "' has ragged data");
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, s.mean[i]);
      y_hi = std::max(y_hi, s.mean[i]);
    }
  }
  if (!std::isfinite(x_lo)) throw InvalidArgument("nothing to plot");
  y_lo = std::min(0.0, y_lo);
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  if (y_hi == y_lo) y_hi = y_lo + 1.0;
  y_hi += 0.05 * (y_hi - y_lo);

  const double left = 70, right = 150, top = 40, bottom = 55;
  const double w = options.width - left - right;
  const double h = options.height - top - bottom;
  auto sx = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * w; };
  auto sy = [&](double y) { return top + h - (y - y_lo) / (y_hi - y_lo) * h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width
      << "\" height=\"" << options.height << "\" font-family=\"sans-serif\" "
      << "font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!options.title.empty()) {
    svg << "<text x=\"" << Coord(left + w / 2) << "\" y=\"22\" "
        << "text-anchor=\"middle\" font-size=\"14\">" << Escape(options.title)
        << "</text>\n";
  }
  // Axes and ticks.
  svg << "<line x1=\"" << Coord(left) << "\" y1=\"" << Coord(top + h)
      << "\" x2=\"" << Coord(left + w) << "\" y2=\"" << Coord(top + h)
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << Coord(left) << "\" y1=\"" << Coord(top)
      << "\" x2=\"" << Coord(left) << "\" y2=\"" << Coord(top + h)
      << "\" stroke=\"black\"/>\n";
  constexpr int kTicks = 5;
  for (int t = 0; t <= kTicks; ++t) {
    const double xv = x_lo + (x_hi - x_lo) * t / kTicks;
    const double yv = y_lo + (y_hi - y_lo) * t / kTicks;
    svg << "<text x=\"" << Coord(sx(xv)) << "\" y=\"" << Coord(top + h + 18)
        << "\" text-anchor=\"middle\">" << Fmt(xv) << "</text>\n";
    svg << "<text x=\"" << Coord(left - 6) << "\" y=\"" << Coord(sy(yv) + 4)
        << "\" text-anchor=\"end\">" << Fmt(yv) << "</text>\n";
  }
  svg << "<text x=\"" << Coord(left + w / 2) << "\" y=\""
      << Coord(options.height - 12) << "\" text-anchor=\"middle\">"
      << Escape(options.x_label) << "</text>\n";
  svg << "<text transform=\"translate(16," << Coord(top + h / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">" << Escape(options.y_label)
      << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      svg << (i ? " " : "") << Coord(sx(s.x[i])) << ',' << Coord(sy(s.mean[i]));
    }
    svg << "\"/>\n";
    const double ly = top + 10 + 18 * static_cast<double>(k);
    svg << "<line x1=\"" << Coord(left + w + 15) << "\" y1=\"" << Coord(ly)
        << "\" x2=\"" << Coord(left + w + 40) << "\" y2=\"" << Coord(ly)
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << Coord(left + w + 46) << "\" y=\"" << Coord(ly + 4)
        << "\">" << Escape(s.method) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace fedspike
