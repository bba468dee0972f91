// SVG writers: Lab-to-sRGB conversion against published reference colors,
// mode-map cell counts and borders, chart structure, and byte determinism.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "ibsignal/csvio.hpp"
#include "ibsignal/errors.hpp"
#include "ibsignal/metrics.hpp"
#include "ibsignal/svg.hpp"
#include "ibsignal/wcs.hpp"

using namespace ibsignal;

namespace {

size_t count_occurrences(const std::string& text, const std::string& needle) {
    size_t count = 0;
    for (size_t pos = text.find(needle); pos != std::string::npos;
         pos = text.find(needle, pos + needle.size()))
        ++count;
    return count;
}

ChipTable grid_chips() {
    std::vector<ChipRow> rows;
    int id = 1;
    for (char r = 'A'; r <= 'C'; ++r)
        for (int col = 0; col < 4; ++col)
            rows.push_back({id++, r, col, 50.0 + 10.0 * col, 5.0 * (r - 'A'), -10.0 + 4.0 * col});
    return ChipTable::from_rows(rows);
}

}  // namespace

TEST_CASE("lab_to_srgb matches reference colors") {
    // Endpoints and primaries of the sRGB gamut have well-known CIELAB
    // coordinates; converting back must land on the original bytes.
    const std::array<int, 3> white = lab_to_srgb(100.0, 0.0, 0.0);
    CHECK(white == std::array<int, 3>{255, 255, 255});

    const std::array<int, 3> black = lab_to_srgb(0.0, 0.0, 0.0);
    CHECK(black == std::array<int, 3>{0, 0, 0});

    const std::array<int, 3> red = lab_to_srgb(53.2408, 80.0925, 67.2032);
    CHECK(std::abs(red[0] - 255) <= 1);
    CHECK(std::abs(red[1] - 0) <= 1);
    CHECK(std::abs(red[2] - 0) <= 1);

    const std::array<int, 3> green = lab_to_srgb(87.7347, -86.1827, 83.1793);
    CHECK(std::abs(green[0] - 0) <= 1);
    CHECK(std::abs(green[1] - 255) <= 1);
    CHECK(std::abs(green[2] - 0) <= 1);

    const std::array<int, 3> blue = lab_to_srgb(32.2970, 79.1875, -107.8602);
    CHECK(std::abs(blue[0] - 0) <= 1);
    CHECK(std::abs(blue[1] - 0) <= 1);
    CHECK(std::abs(blue[2] - 255) <= 1);

    // Mid gray (128,128,128) sits at L* = 53.585 on the neutral axis.
    const std::array<int, 3> gray = lab_to_srgb(53.5850, 0.0, 0.0);
    CHECK(std::abs(gray[0] - 128) <= 1);
    CHECK(gray[0] == gray[1]);
    CHECK(gray[1] == gray[2]);

    // Out-of-gamut input clamps instead of wrapping.
    const std::array<int, 3> loud = lab_to_srgb(60.0, 150.0, -150.0);
    for (int channel : loud) {
        CHECK(channel >= 0);
        CHECK(channel <= 255);
    }
}

TEST_CASE("mode map svg has one cell per chip") {
    const ChipTable chips = grid_chips();
    NamingSystem system = NamingSystem::uniform_prior(chips.count(), 3);
    for (int i = 0; i < chips.count(); ++i) {
        for (int s = 0; s < 3; ++s) system.q_at(i, s) = 0.0;
        system.q_at(i, i % 3) = 1.0;
    }
    const ModeMap map = mode_map(system, chips);

    save_mode_map_svg("map_solid.svg", map, chips, false);
    const std::string solid = read_text_file("map_solid.svg");
    CHECK(count_occurrences(solid, "<rect class=\"cell\"") ==
          static_cast<size_t>(chips.count()));
    CHECK(count_occurrences(solid, "stroke-dasharray") == 0);
    CHECK(count_occurrences(solid, "width=\"12\" height=\"12\"") ==
          static_cast<size_t>(chips.count()));

    save_mode_map_svg("map_dashed.svg", map, chips, true);
    const std::string dashed = read_text_file("map_dashed.svg");
    CHECK(count_occurrences(dashed, "stroke-dasharray") == 1);
}

TEST_CASE("mode map pair places agent and human side by side") {
    const ChipTable chips = grid_chips();
    NamingSystem system = NamingSystem::uniform_prior(chips.count(), 2);
    const ModeMap map = mode_map(system, chips);

    save_mode_map_pair_svg("map_pair.svg", map, map, chips);
    const std::string pair = read_text_file("map_pair.svg");
    CHECK(count_occurrences(pair, "<rect class=\"cell\"") ==
          2 * static_cast<size_t>(chips.count()));
    CHECK(count_occurrences(pair, "stroke-dasharray") == 1);
    CHECK(count_occurrences(pair, ">agent</text>") == 1);
    CHECK(count_occurrences(pair, ">human</text>") == 1);
}

TEST_CASE("plot svg renders axes even with no points") {
    save_plot_svg("plot_empty.svg", "empty", "x", "y", {});
    const std::string empty = read_text_file("plot_empty.svg");
    CHECK(count_occurrences(empty, "viewBox=\"0 0 800 600\"") == 1);
    CHECK(count_occurrences(empty, "<circle") == 0);
    CHECK(count_occurrences(empty, "<polyline") == 0);
    CHECK(count_occurrences(empty, "<line") >= 2);
    CHECK(count_occurrences(empty, ">x</text>") == 1);
    CHECK(count_occurrences(empty, ">y</text>") == 1);
}

TEST_CASE("plot svg draws markers, lines and the legend") {
    PlotSeries dots{"runs", {0.0, 1.0, 2.0}, {0.5, 0.25, 0.125}, "", false};
    PlotSeries curve{"frontier", {0.0, 1.0, 2.0}, {1.0, 0.5, 0.25}, "#000000", true};
    save_plot_svg("plot_mixed.svg", "tradeoff", "complexity", "informativeness", {dots, curve});
    const std::string mixed = read_text_file("plot_mixed.svg");
    CHECK(count_occurrences(mixed, "<circle") == 4);  // 3 markers + legend swatch
    CHECK(count_occurrences(mixed, "<polyline") == 1);
    CHECK(count_occurrences(mixed, ">runs</text>") == 1);
    CHECK(count_occurrences(mixed, ">frontier</text>") == 1);
    CHECK(count_occurrences(mixed, ">tradeoff</text>") == 1);
}

TEST_CASE("plot svg escapes markup and drops non-finite points") {
    const double nan = std::nan("");
    const double inf = HUGE_VAL;
    PlotSeries holes{"a<b&c", {0.0, nan, 2.0, 3.0}, {1.0, 1.0, inf, 2.0}, "", false};
    save_plot_svg("plot_holes.svg", "", "x", "y", {holes});
    const std::string svg = read_text_file("plot_holes.svg");
    CHECK(count_occurrences(svg, "<circle") == 3);  // 2 points + legend swatch
    CHECK(count_occurrences(svg, "a&lt;b&amp;c") == 1);
    CHECK(svg.find("nan") == std::string::npos);
    CHECK(svg.find("inf") == std::string::npos);

    PlotSeries bad{"bad", {1.0}, {1.0, 2.0}, "", false};
    CHECK_THROWS_AS(save_plot_svg("plot_bad.svg", "", "x", "y", {bad}), DegenerateInputError);
}

TEST_CASE("svg output is byte-identical across calls") {
    const ChipTable chips = grid_chips();
    NamingSystem system = NamingSystem::uniform_prior(chips.count(), 2);
    for (int i = 0; i < chips.count(); ++i) {
        system.q_at(i, 0) = i % 2 ? 0.9 : 0.1;
        system.q_at(i, 1) = i % 2 ? 0.1 : 0.9;
    }
    const ModeMap map = mode_map(system, chips);
    save_mode_map_svg("map_det_a.svg", map, chips, true);
    save_mode_map_svg("map_det_b.svg", map, chips, true);
    CHECK(read_text_file("map_det_a.svg") == read_text_file("map_det_b.svg"));

    PlotSeries s{"s", {0.1234567890123, 2.0 / 3.0}, {1e-9, 123456.789}, "", true};
    save_plot_svg("plot_det_a.svg", "t", "x", "y", {s});
    save_plot_svg("plot_det_b.svg", "t", "x", "y", {s});
    CHECK(read_text_file("plot_det_a.svg") == read_text_file("plot_det_b.svg"));
}

TEST_CASE("degenerate plot ranges still produce a usable frame") {
    PlotSeries flat{"flat", {1.0, 1.0, 1.0}, {2.0, 2.0, 2.0}, "", false};
    save_plot_svg("plot_flat.svg", "", "x", "y", {flat});
    const std::string svg = read_text_file("plot_flat.svg");
    CHECK(count_occurrences(svg, "<circle") == 4);
    CHECK(svg.find("nan") == std::string::npos);
}
