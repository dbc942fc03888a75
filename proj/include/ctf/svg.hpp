#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ctf {

// Rectangular table rendered as an annotated heatmap. NaN cells are drawn
// hatched (the not-significant marker). Diverging tables use a palette
// centered at zero.
struct Heatmap {
  std::string title;
  std::string row_label;
  std::string col_label;
  std::vector<double> row_values;
  std::vector<double> col_values;
  Eigen::MatrixXd values;  // rows x cols
  bool diverging = false;
};

std::string render_heatmap_svg(const Heatmap& map, const std::string& out_path);

struct LineSeries {
  std::string name;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> band_lo;  // optional, same length as x
  std::vector<double> band_hi;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<LineSeries> series;
};

std::string render_lines_svg(const LineChart& chart,
                             const std::string& out_path);

}  // namespace ctf
