// Copyright 2026 The fthlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace fthlab::harness {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::vector<Series> series;
};

namespace svg_detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

}  // namespace svg_detail

/// Panels stacked vertically, one polyline per series. Non-positive values
/// are dropped on log axes.
inline std::string render_svg(const std::vector<Panel>& panels, int width = 640,
                              int panel_height = 280) {
  using svg_detail::num;
  const double left = 70, right = 150, top = 30, bottom = 45;
  const int height = panel_height * static_cast<int>(std::max<std::size_t>(1, panels.size()));
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const Panel& pan = panels[p];
    const double y0 = p * panel_height;
    const double pw = width - left - right;
    const double ph = panel_height - top - bottom;
    auto ty = [&](double v) { return pan.log_y ? std::log10(v) : v; };
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& s : pan.series) {
      for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        if (pan.log_y && !(s.y[i] > 0.0)) continue;
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        ymin = std::min(ymin, ty(s.y[i]));
        ymax = std::max(ymax, ty(s.y[i]));
      }
    }
    if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return y0 + top + (1.0 - (ty(y) - ymin) / (ymax - ymin)) * ph; };

    os << "<text x=\"" << num(left) << "\" y=\"" << num(y0 + 18) << "\" font-size=\"13\">"
       << svg_detail::escape(pan.title) << "</text>\n";
    os << "<rect x=\"" << num(left) << "\" y=\"" << num(y0 + top) << "\" width=\""
       << num(pw) << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
      const double fx = xmin + t * (xmax - xmin) / 4;
      const double fy = ymin + t * (ymax - ymin) / 4;
      const double yl = pan.log_y ? std::pow(10.0, fy) : fy;
      os << "<text x=\"" << num(px(fx)) << "\" y=\"" << num(y0 + top + ph + 15)
         << "\" text-anchor=\"middle\">" << num(fx) << "</text>\n";
      os << "<text x=\"" << num(left - 5) << "\" y=\"" << num(py(yl) + 4)
         << "\" text-anchor=\"end\">" << num(yl) << "</text>\n";
    }
    os << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(y0 + panel_height - 8)
       << "\" text-anchor=\"middle\">" << svg_detail::escape(pan.x_label) << "</text>\n";
    os << "<text x=\"15\" y=\"" << num(y0 + top + ph / 2) << "\" transform=\"rotate(-90 15 "
       << num(y0 + top + ph / 2) << ")\" text-anchor=\"middle\">"
       << svg_detail::escape(pan.y_label + (pan.log_y ? " (log)" : "")) << "</text>\n";

    for (std::size_t s = 0; s < pan.series.size(); ++s) {
      const Series& ser = pan.series[s];
      const char* color = svg_detail::kPalette[s % std::size(svg_detail::kPalette)];
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      bool first = true;
      for (std::size_t i = 0; i < ser.x.size() && i < ser.y.size(); ++i) {
        if (!std::isfinite(ser.y[i]) || (pan.log_y && !(ser.y[i] > 0.0))) continue;
        os << (first ? "" : " ") << num(px(ser.x[i])) << "," << num(py(ser.y[i]));
        first = false;
      }
      os << "\"/>\n";
      const double ly = y0 + top + 12 + 16 * s;
      os << "<line x1=\"" << num(left + pw + 10) << "\" y1=\"" << num(ly - 4) << "\" x2=\""
         << num(left + pw + 30) << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << color
         << "\" stroke-width=\"2\"/>\n";
      os << "<text x=\"" << num(left + pw + 35) << "\" y=\"" << num(ly) << "\">"
         << svg_detail::escape(ser.label) << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace fthlab::harness
