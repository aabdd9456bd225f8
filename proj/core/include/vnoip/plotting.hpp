#pragma once

#include <string>
#include <vector>

namespace vnoip {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Plain CSV with a header row.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Self-contained SVG line chart (axes, ticks, legend); no external renderer.
void write_svg_chart(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<Series>& series);

}  // namespace vnoip
