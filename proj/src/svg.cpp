#include "ctf/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "ctf/error.hpp"

namespace ctf {

namespace {

std::string num(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.6g", v);
  return buffer;
}

void save(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open \"" + path + "\" for writing");
  out << content;
  if (!out) throw IoError("write failed for \"" + path + "\"");
}

std::string rgb(double r, double g, double b) {
  char buffer[16];
  std::snprintf(buffer, sizeof(buffer), "#%02x%02x%02x",
                static_cast<int>(std::round(255 * r)),
                static_cast<int>(std::round(255 * g)),
                static_cast<int>(std::round(255 * b)));
  return buffer;
}

// Diverging blue-white-red with t in [-1, 1]; sequential white-to-teal with
// t in [0, 1].
std::string diverging_color(double t) {
  t = std::clamp(t, -1.0, 1.0);
  if (t < 0.0) return rgb(1.0 + 0.75 * t, 1.0 + 0.55 * t, 1.0);
  return rgb(1.0, 1.0 - 0.55 * t, 1.0 - 0.75 * t);
}

std::string sequential_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return rgb(1.0 - 0.75 * t, 1.0 - 0.35 * t, 1.0 - 0.25 * t);
}

}  // namespace

std::string render_heatmap_svg(const Heatmap& map,
                               const std::string& out_path) {
  const int rows = static_cast<int>(map.values.rows());
  const int cols = static_cast<int>(map.values.cols());
  if (rows == 0 || cols == 0 ||
      rows != static_cast<int>(map.row_values.size()) ||
      cols != static_cast<int>(map.col_values.size())) {
    throw DimensionError("render_heatmap_svg: table shape mismatch");
  }
  const double cell_w = 86.0;
  const double cell_h = 46.0;
  const double left = 80.0;
  const double top = 55.0;
  const double width = left + cols * cell_w + 30.0;
  const double height = top + rows * cell_h + 60.0;

  double finite_max = 0.0;
  double finite_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double v = map.values(i, j);
      if (std::isnan(v)) continue;
      finite_max = std::max(finite_max, std::abs(v));
      finite_min = std::min(finite_min, v);
    }
  }
  if (!std::isfinite(finite_min)) finite_min = 0.0;
  double low = finite_min;
  double span = 0.0;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double v = map.values(i, j);
      if (!std::isnan(v)) span = std::max(span, v - low);
    }
  }

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) +
         "\" height=\"" + num(height) + "\">\n";
  svg +=
      "<defs><pattern id=\"hatch\" width=\"7\" height=\"7\" "
      "patternTransform=\"rotate(45)\" patternUnits=\"userSpaceOnUse\">"
      "<rect width=\"7\" height=\"7\" fill=\"#f5f5f5\"/>"
      "<line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"7\" stroke=\"#888\" "
      "stroke-width=\"2\"/></pattern></defs>\n";
  svg += "<text x=\"" + num(width / 2) +
         "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">" +
         map.title + "</text>\n";

  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double v = map.values(i, j);
      const double x = left + j * cell_w;
      // Largest row value drawn at the top.
      const double y = top + (rows - 1 - i) * cell_h;
      std::string fill;
      if (std::isnan(v)) {
        fill = "url(#hatch)";
      } else if (map.diverging) {
        fill = diverging_color(finite_max > 0.0 ? v / finite_max : 0.0);
      } else {
        fill = sequential_color(span > 0.0 ? (v - low) / span : 0.0);
      }
      svg += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" +
             num(cell_w) + "\" height=\"" + num(cell_h) + "\" fill=\"" + fill +
             "\" stroke=\"#444\"/>\n";
      if (!std::isnan(v)) {
        svg += "<text x=\"" + num(x + cell_w / 2) + "\" y=\"" +
               num(y + cell_h / 2 + 4) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"11\">" +
               num(v) + "</text>\n";
      }
    }
  }
  for (int i = 0; i < rows; ++i) {
    const double y = top + (rows - 1 - i) * cell_h + cell_h / 2 + 4;
    svg += "<text x=\"" + num(left - 8) + "\" y=\"" + num(y) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"12\">" +
           num(map.row_values[i]) + "</text>\n";
  }
  for (int j = 0; j < cols; ++j) {
    const double x = left + j * cell_w + cell_w / 2;
    svg += "<text x=\"" + num(x) + "\" y=\"" + num(top + rows * cell_h + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"12\">" +
           num(map.col_values[j]) + "</text>\n";
  }
  svg += "<text x=\"18\" y=\"" + num(top + rows * cell_h / 2.0) +
         "\" font-family=\"sans-serif\" font-size=\"12\">" + map.row_label +
         "</text>\n";
  svg += "<text x=\"" + num(left + cols * cell_w / 2.0) + "\" y=\"" +
         num(top + rows * cell_h + 42) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">" +
         map.col_label + "</text>\n";
  svg += "</svg>\n";
  save(out_path, svg);
  return out_path;
}

std::string render_lines_svg(const LineChart& chart,
                             const std::string& out_path) {
  const double width = 640.0;
  const double height = 420.0;
  const double left = 70.0;
  const double right = width - 25.0;
  const double top = 50.0;
  const double bottom = height - 55.0;

  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  double y_min = x_min;
  double y_max = -x_min;
  for (const LineSeries& s : chart.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, s.y[i]);
      y_max = std::max(y_max, s.y[i]);
      if (s.band_lo.size() == s.x.size()) {
        y_min = std::min(y_min, s.band_lo[i]);
        y_max = std::max(y_max, s.band_hi[i]);
      }
    }
  }
  if (!std::isfinite(x_min) || x_min == x_max) {
    x_min -= 0.5;
    x_max = x_min + 1.0;
  }
  if (!std::isfinite(y_min) || y_min == y_max) {
    y_min -= 0.5;
    y_max = y_min + 1.0;
  }
  const auto sx = [&](double x) {
    return left + (x - x_min) / (x_max - x_min) * (right - left);
  };
  const auto sy = [&](double y) {
    return bottom - (y - y_min) / (y_max - y_min) * (bottom - top);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) +
         "\" height=\"" + num(height) + "\">\n";
  svg += "<text x=\"" + num(width / 2) +
         "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">" +
         chart.title + "</text>\n";
  svg += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" +
         num(right - left) + "\" height=\"" + num(bottom - top) +
         "\" fill=\"none\" stroke=\"#444\"/>\n";

  for (const LineSeries& s : chart.series) {
    if (s.band_lo.size() == s.x.size() && !s.x.empty()) {
      std::string pts;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        pts += num(sx(s.x[i])) + "," + num(sy(s.band_hi[i])) + " ";
      }
      for (std::size_t i = s.x.size(); i-- > 0;) {
        pts += num(sx(s.x[i])) + "," + num(sy(s.band_lo[i])) + " ";
      }
      svg += "<polygon points=\"" + pts + "\" fill=\"" + s.color +
             "\" opacity=\"0.15\"/>\n";
    }
  }
  for (const LineSeries& s : chart.series) {
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      pts += num(sx(s.x[i])) + "," + num(sy(s.y[i])) + " ";
    }
    svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" +
           s.color + "\" stroke-width=\"2\"/>\n";
  }

  // Axis extremes and labels.
  svg += "<text x=\"" + num(left) + "\" y=\"" + num(bottom + 18) +
         "\" font-family=\"sans-serif\" font-size=\"11\">" + num(x_min) +
         "</text>\n";
  svg += "<text x=\"" + num(right) + "\" y=\"" + num(bottom + 18) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
         num(x_max) + "</text>\n";
  svg += "<text x=\"" + num(left - 6) + "\" y=\"" + num(bottom) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
         num(y_min) + "</text>\n";
  svg += "<text x=\"" + num(left - 6) + "\" y=\"" + num(top + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
         num(y_max) + "</text>\n";
  svg += "<text x=\"" + num((left + right) / 2) + "\" y=\"" +
         num(height - 16) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">" +
         chart.x_label + "</text>\n";

  double legend_y = top + 16;
  for (const LineSeries& s : chart.series) {
    svg += "<line x1=\"" + num(right - 130) + "\" y1=\"" + num(legend_y - 4) +
           "\" x2=\"" + num(right - 104) + "\" y2=\"" + num(legend_y - 4) +
           "\" stroke=\"" + s.color + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + num(right - 98) + "\" y=\"" + num(legend_y) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + s.name +
           "</text>\n";
    legend_y += 16;
  }
  svg += "</svg>\n";
  save(out_path, svg);
  return out_path;
}

}  // namespace ctf
