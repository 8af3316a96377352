#pragma once

// Minimal SVG line plots and heatmaps.

#include <string>
#include <vector>

namespace lab {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

std::string render_svg(const LinePlot& plot, int width = 720, int height = 440);

/// values[row][col]; rows run along y (bottom to top), columns along x.
std::string render_heatmap(const std::vector<std::vector<double>>& values, double x0, double x1, double y0,
                           double y1, const std::string& title, const std::string& x_label,
                           const std::string& y_label, int width = 720, int height = 440);

}  // namespace lab
