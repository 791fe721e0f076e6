#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "aosr/error.hpp"
#include "aosr/svg.hpp"
#include "helpers.hpp"

using namespace aosr;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_SUITE("svg") {
  TEST_CASE("one polyline per line series") {
    const PlotSeries a{"error", {{100, 0.3}, {400, 0.2}, {1600, 0.1}}, PlotStyle::line};
    const PlotSeries b{"bound", {{100, 0.05}, {1600, 0.0125}}, PlotStyle::line};
    const PlotSeries c{"trials", {{100, 0.31}, {400, 0.22}}, PlotStyle::points};
    const std::string one = render_svg_lines({a}, "n", "error", true);
    CHECK(count(one, "<polyline") == 1);
    CHECK(one.rfind("<svg", 0) == 0);
    const std::string three = render_svg_lines({a, b, c}, "n", "error", true);
    CHECK(count(three, "<polyline") == 2);
    CHECK(count(three, "<circle") >= 2);
    CHECK(three.find("bound") != std::string::npos);
  }

  TEST_CASE("deterministic output") {
    const PlotSeries a{"gap", {{1, 2}, {2, 1.5}, {3, 0.7}}, PlotStyle::line};
    const auto dir = testing::scratch_dir("svg");
    emit_svg_lines({a}, "x", "y", dir / "a.svg", false);
    emit_svg_lines({a}, "x", "y", dir / "b.svg", false);
    auto slurp = [](const std::filesystem::path& p) {
      std::ifstream in(p, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      return ss.str();
    };
    CHECK(slurp(dir / "a.svg") == slurp(dir / "b.svg"));
    CHECK(slurp(dir / "a.svg") == render_svg_lines({a}, "x", "y", false));
  }

  TEST_CASE("invalid input") {
    CHECK_THROWS_AS(render_svg_lines({}, "x", "y", false), Error);
    const PlotSeries negative{"s", {{1, -1}, {2, 1}}, PlotStyle::line};
    CHECK_NOTHROW(render_svg_lines({negative}, "x", "y", false));
    CHECK_THROWS_AS(render_svg_lines({negative}, "x", "y", true), Error);
    const PlotSeries unsorted{"s", {{2, 1}, {1, 1}}, PlotStyle::line};
    CHECK_THROWS_AS(render_svg_lines({unsorted}, "x", "y", false), Error);
    const PlotSeries empty{"s", {}, PlotStyle::line};
    CHECK_THROWS_AS(render_svg_lines({empty}, "x", "y", false), Error);
  }
}
