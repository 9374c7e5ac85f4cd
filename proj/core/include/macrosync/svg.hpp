#pragma once

#include <string>
#include <vector>

// Deterministic SVG heatmaps: the same matrix always renders to the same
// bytes. NaN cells are painted black.
namespace macrosync {

enum class ColorScale {
  Grayscale,  // min -> black, max -> white
  Diverging,  // blue -> white -> red, centered at zero
};

struct HeatmapOptions {
  ColorScale scale = ColorScale::Grayscale;
  int cell_size = 4;  // pixels per cell
  std::string title;
};

/// Renders a row-major matrix (rows x cols) to an SVG string. Throws on an
/// empty or non-rectangular input (values.size() != rows * cols).
std::string render_heatmap(const std::vector<double>& values,
                           std::size_t rows, std::size_t cols,
                           const HeatmapOptions& opt);

}  // namespace macrosync
