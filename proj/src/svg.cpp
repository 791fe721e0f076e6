#include "aosr/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "aosr/csv.hpp"
#include "aosr/error.hpp"

namespace aosr {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 170.0;
constexpr double kTop = 20.0;
constexpr double kBottom = 50.0;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;

  double value(double v) const { return log ? std::log10(v) : v; }
  double frac(double v) const { return (value(v) - lo) / (hi - lo); }
};

Axis make_axis(double lo, double hi, bool log) {
  Axis a;
  a.log = log;
  a.lo = a.value(lo);
  a.hi = a.value(hi);
  if (a.hi - a.lo <= 0.0) {
    const double pad = a.lo == 0.0 ? 1.0 : std::abs(a.lo) * 0.1;
    a.lo -= pad;
    a.hi += pad;
  }
  return a;
}

}  // namespace

std::string render_svg_lines(const std::vector<PlotSeries>& series, const std::string& x_label,
                             const std::string& y_label, bool log_log) {
  require(!series.empty(), "plot needs at least one series");
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    require(!s.points.empty(), "series '" + s.name + "' has no points");
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      const auto [x, y] = s.points[i];
      require(std::isfinite(x) && std::isfinite(y), "series '" + s.name + "' has non-finite coordinates");
      if (log_log) require(x > 0.0 && y > 0.0, "log-log plot needs positive coordinates in '" + s.name + "'");
      if (i > 0) require(x > s.points[i - 1].first, "series '" + s.name + "' x values must strictly increase");
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  const Axis ax = make_axis(xmin, xmax, log_log);
  const Axis ay = make_axis(ymin, ymax, log_log);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + ax.frac(x) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - ay.frac(y)) * ph; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  out << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double f = static_cast<double>(i) / kTicks;
    const double xv = ax.lo + f * (ax.hi - ax.lo);
    const double yv = ay.lo + f * (ay.hi - ay.lo);
    const double tx = kLeft + f * pw;
    const double ty = kTop + (1.0 - f) * ph;
    out << "<text x=\"" << num(tx) << "\" y=\"" << num(kTop + ph + 16) << "\" text-anchor=\"middle\">"
        << format_double(log_log ? std::pow(10.0, xv) : xv).substr(0, 8) << "</text>\n";
    out << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(ty + 4) << "\" text-anchor=\"end\">"
        << format_double(log_log ? std::pow(10.0, yv) : yv).substr(0, 8) << "</text>\n";
  }
  out << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 10) << "\" text-anchor=\"middle\">"
      << escape(x_label) << "</text>\n";
  out << "<text x=\"16\" y=\"" << num(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << num(kTop + ph / 2) << ")\">" << escape(y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    if (s.style == PlotStyle::line) {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.points.size(); ++i) {
        out << (i ? " " : "") << num(px(s.points[i].first)) << ',' << num(py(s.points[i].second));
      }
      out << "\"/>\n";
    } else {
      for (const auto& [x, y] : s.points) {
        out << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"2.5\" fill=\"" << color
            << "\"/>\n";
      }
    }
    const double ly = kTop + 14 + 18 * static_cast<double>(k);
    const double lx = kWidth - kRight + 12;
    out << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(lx + 20) << "\" y2=\""
        << num(ly - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << num(lx + 26) << "\" y=\"" << num(ly) << "\">" << escape(s.name) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void emit_svg_lines(const std::vector<PlotSeries>& series, const std::string& x_label, const std::string& y_label,
                    const std::filesystem::path& path, bool log_log) {
  write_file_atomic(path, render_svg_lines(series, x_label, y_label, log_log));
}

}  // namespace aosr
