// Deterministic SVG writers: scatter/line charts on a fixed 800x600 viewport
// with axes, ticks, and a legend, and mode-map grids over the chip layout
// (one 12x12 px cell per chip, filled with the modal signal's centroid color).
// All numbers go through fixed printf formats, so equal inputs produce
// byte-identical files.
#pragma once

#include <array>
#include <string>
#include <vector>

#include "ibsignal/metrics.hpp"
#include "ibsignal/wcs.hpp"

namespace ibsignal {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color;  // CSS color; empty picks from the default palette
    bool line = false;  // polyline through the points instead of markers
};

// Non-finite points are dropped. With no finite points the chart still has
// axes, spanning [0,1] on both sides.
void save_plot_svg(const std::string& path, const std::string& title,
                   const std::string& x_label, const std::string& y_label,
                   const std::vector<PlotSeries>& series);

// CIELAB (D65 white) to 8-bit sRGB, gamut-clamped per channel.
std::array<int, 3> lab_to_srgb(double lab_l, double lab_a, double lab_b);

void save_mode_map_svg(const std::string& path, const ModeMap& map, const ChipTable& chips,
                       bool dashed_border);

// Agent map on the left, human map on the right with the dashed border.
void save_mode_map_pair_svg(const std::string& path, const ModeMap& agent, const ModeMap& human,
                            const ChipTable& chips);

}  // namespace ibsignal
