#pragma once

#include <string>
#include <vector>

namespace lcurve::svg {

struct Series {
  std::vector<double> x;
  std::vector<double> y;
  std::string stroke = "#000000";
  double width = 1.0;
  bool dashed = false;
  std::string label;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  double width = 640;
  double height = 420;
  std::vector<Series> series;
};

/// Standalone SVG document. Axis ranges cover every series; coordinates are
/// printed with fixed precision so output is byte-stable.
std::string render(const Chart& chart);

}  // namespace lcurve::svg
