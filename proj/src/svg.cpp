#include "cacq/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace cacq {

namespace {

constexpr double kWidth = 640, kHeight = 440;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<SvgSeries>& series) {
  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  if (!(x_min <= x_max)) throw std::invalid_argument("svg: no points");
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) y_max = y_min + (y_min == 0.0 ? 1.0 : std::abs(y_min) * 0.1);

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) { return kTop + plot_h - (y - y_min) / (y_max - y_min) * plot_h; };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("svg: cannot open " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">"
      << title << "</text>\n";

  // axes and ticks
  out << "<g stroke=\"#333\" stroke-width=\"1\">\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w
      << "\" y2=\"" << kTop + plot_h << "\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kTop + plot_h << "\"/>\n";
  out << "</g>\n";
  const int ticks = 5;
  for (int i = 0; i <= ticks; ++i) {
    const double fx = x_min + (x_max - x_min) * i / ticks;
    const double fy = y_min + (y_max - y_min) * i / ticks;
    out << "<line x1=\"" << px(fx) << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << px(fx)
        << "\" y2=\"" << kTop + plot_h + 5 << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << px(fx) << "\" y=\"" << kTop + plot_h + 18
        << "\" text-anchor=\"middle\">" << num(fx) << "</text>\n";
    out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << py(fy) << "\" x2=\"" << kLeft
        << "\" y2=\"" << py(fy) << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << kLeft - 8 << "\" y=\"" << py(fy) + 4 << "\" text-anchor=\"end\">"
        << num(fy) << "</text>\n";
  }
  out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
  out << "<text x=\"16\" y=\"" << kTop + plot_h / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << kTop + plot_h / 2 << ")\">"
      << y_label << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    auto points = series[i].points;
    std::sort(points.begin(), points.end());
    for (const auto& [x, y] : points) out << num(px(x)) << ',' << num(py(y)) << ' ';
    out << "\"/>\n";
    out << "<text x=\"" << kLeft + plot_w - 8 << "\" y=\"" << kTop + 16 + 16 * i
        << "\" text-anchor=\"end\" fill=\"" << color << "\">" << series[i].name << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace cacq
