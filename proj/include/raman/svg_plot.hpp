#pragma once

#include <string>
#include <vector>

namespace raman {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#000000";
  bool dashed = false;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 720;
  int height = 480;
};

/// Self-contained SVG line plot with linear axes, ticks and a legend.
std::string render_svg(const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace raman
