#include "macrosync/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace macrosync {

namespace {

std::string hex_color(int r, int g, int b) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

std::string color_for(double v, double lo, double hi, ColorScale scale) {
  if (std::isnan(v)) return "#000000";
  if (scale == ColorScale::Grayscale) {
    const double t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
    const int g = static_cast<int>(std::lround(255.0 * std::clamp(t, 0.0, 1.0)));
    return hex_color(g, g, g);
  }
  // Diverging: negative toward blue, positive toward red, zero white.
  const double m = std::max(std::abs(lo), std::abs(hi));
  const double t = m > 0.0 ? std::clamp(v / m, -1.0, 1.0) : 0.0;
  const int shade = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(t))));
  if (t < 0.0) return hex_color(shade, shade, 255);
  return hex_color(255, shade, shade);
}

}  // namespace

std::string render_heatmap(const std::vector<double>& values,
                           std::size_t rows, std::size_t cols,
                           const HeatmapOptions& opt) {
  if (rows == 0 || cols == 0 || values.size() != rows * cols) {
    throw std::invalid_argument("render_heatmap: non-rectangular input");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : values) {
    if (std::isnan(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(lo <= hi)) {  // all-NaN input
    lo = 0.0;
    hi = 0.0;
  }

  const int cs = opt.cell_size;
  const std::size_t width = cols * static_cast<std::size_t>(cs);
  const std::size_t title_pad = opt.title.empty() ? 0 : 16;
  const std::size_t height = rows * static_cast<std::size_t>(cs) + title_pad;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\">\n";
  if (!opt.title.empty()) {
    svg += "<text x=\"2\" y=\"12\" font-size=\"10\" font-family=\"monospace\">" +
           opt.title + "</text>\n";
  }
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      // Row 0 rendered at the bottom so axes read in increasing order.
      const std::size_t y = (rows - 1 - r) * static_cast<std::size_t>(cs) +
                            title_pad;
      svg += "<rect x=\"" + std::to_string(c * static_cast<std::size_t>(cs)) +
             "\" y=\"" + std::to_string(y) + "\" width=\"" +
             std::to_string(cs) + "\" height=\"" + std::to_string(cs) +
             "\" fill=\"" +
             color_for(values[r * cols + c], lo, hi, opt.scale) + "\"/>\n";
    }
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace macrosync
