#pragma once

#include <string>
#include <utility>
#include <vector>

namespace cacq {

struct SvgSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

/// Minimal standalone SVG line chart: axes, ticks, one polyline per series,
/// inline legend. No drawing dependencies.
void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<SvgSeries>& series);

}  // namespace cacq
