#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace aosr {

enum class PlotStyle { line, points };

struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;  ///< x strictly increasing
  PlotStyle style = PlotStyle::line;
};

/// Standalone SVG: one polyline per line series, circles for point series, and a legend.
std::string render_svg_lines(const std::vector<PlotSeries>& series, const std::string& x_label,
                             const std::string& y_label, bool log_log);

void emit_svg_lines(const std::vector<PlotSeries>& series, const std::string& x_label, const std::string& y_label,
                    const std::filesystem::path& path, bool log_log);

}  // namespace aosr
