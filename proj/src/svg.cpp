#include "ibsignal/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "ibsignal/csvio.hpp"
#include "ibsignal/errors.hpp"

namespace ibsignal {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 24.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 56.0;
constexpr int kCell = 12;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string xml_escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else out += c;
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void include(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    // Pad so points sit off the frame; degenerate ranges get a fixed span.
    void finish() {
        if (lo > hi) {
            lo = 0.0;
            hi = 1.0;
        } else if (hi - lo < 1e-303) {
            lo -= 0.5;
            hi += 0.5;
        } else {
            const double pad = 0.04 * (hi - lo);
            lo -= pad;
            hi += pad;
        }
    }
};

std::string text_elem(double x, double y, const std::string& anchor, const std::string& extra,
                      const std::string& content) {
    return "<text x=\"" + px(x) + "\" y=\"" + px(y) + "\" text-anchor=\"" + anchor +
           "\" font-family=\"sans-serif\" font-size=\"12\"" + extra + ">" + xml_escape(content) +
           "</text>\n";
}

std::string rgb_hex(const std::array<int, 3>& rgb) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

std::string mode_map_group(const ModeMap& map, const ChipTable& chips, double ox, double oy,
                           bool dashed_border) {
    int max_col = 0;
    int max_row = 0;
    for (const ChipRow& chip : chips.chips()) {
        max_col = std::max(max_col, chip.grid_col);
        max_row = std::max(max_row, chip.grid_row - 'A');
    }
    const double w = static_cast<double>((max_col + 1) * kCell);
    const double h = static_cast<double>((max_row + 1) * kCell);

    std::string out = "<g transform=\"translate(" + px(ox) + "," + px(oy) + ")\">\n";
    for (int i = 0; i < chips.count(); ++i) {
        const ChipRow& chip = chips.chip(i);
        const int signal = map.modal[static_cast<size_t>(i)];
        const Tensor& c = map.centroids[static_cast<size_t>(signal)];
        const std::string fill = rgb_hex(lab_to_srgb(c.data[0], c.data[1], c.data[2]));
        out += "<rect class=\"cell\" x=\"" + std::to_string(chip.grid_col * kCell) + "\" y=\"" +
               std::to_string((chip.grid_row - 'A') * kCell) + "\" width=\"" +
               std::to_string(kCell) + "\" height=\"" + std::to_string(kCell) + "\" fill=\"" +
               fill + "\"/>\n";
    }
    out += "<rect x=\"0.5\" y=\"0.5\" width=\"" + px(w - 1.0) + "\" height=\"" + px(h - 1.0) +
           "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"";
    if (dashed_border) out += " stroke-dasharray=\"4,3\"";
    out += "/>\n</g>\n";
    return out;
}

void map_extent(const ChipTable& chips, double& w, double& h) {
    int max_col = 0;
    int max_row = 0;
    for (const ChipRow& chip : chips.chips()) {
        max_col = std::max(max_col, chip.grid_col);
        max_row = std::max(max_row, chip.grid_row - 'A');
    }
    w = static_cast<double>((max_col + 1) * kCell);
    h = static_cast<double>((max_row + 1) * kCell);
}

}  // namespace

void save_plot_svg(const std::string& path, const std::string& title,
                   const std::string& x_label, const std::string& y_label,
                   const std::vector<PlotSeries>& series) {
    for (const PlotSeries& s : series)
        if (s.x.size() != s.y.size())
            throw DegenerateInputError("plot series '" + s.label + "': x/y length mismatch");

    Range rx, ry;
    for (const PlotSeries& s : series)
        for (size_t i = 0; i < s.x.size(); ++i)
            if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) {
                rx.include(s.x[i]);
                ry.include(s.y[i]);
            }
    rx.finish();
    ry.finish();

    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    const auto sx = [&](double v) { return kMarginLeft + (v - rx.lo) / (rx.hi - rx.lo) * plot_w; };
    const auto sy = [&](double v) {
        return kMarginTop + plot_h - (v - ry.lo) / (ry.hi - ry.lo) * plot_h;
    };

    std::string out =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
        "viewBox=\"0 0 800 600\">\n"
        "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";

    for (int t = 0; t <= 4; ++t) {
        const double fx = rx.lo + (rx.hi - rx.lo) * t / 4.0;
        const double fy = ry.lo + (ry.hi - ry.lo) * t / 4.0;
        const double gx = sx(fx);
        const double gy = sy(fy);
        out += "<line x1=\"" + px(gx) + "\" y1=\"" + px(kMarginTop) + "\" x2=\"" + px(gx) +
               "\" y2=\"" + px(kMarginTop + plot_h) + "\" stroke=\"#dddddd\"/>\n";
        out += "<line x1=\"" + px(kMarginLeft) + "\" y1=\"" + px(gy) + "\" x2=\"" +
               px(kMarginLeft + plot_w) + "\" y2=\"" + px(gy) + "\" stroke=\"#dddddd\"/>\n";
        out += text_elem(gx, kMarginTop + plot_h + 16.0, "middle", "", tick_label(fx));
        out += text_elem(kMarginLeft - 6.0, gy + 4.0, "end", "", tick_label(fy));
    }

    out += "<line x1=\"" + px(kMarginLeft) + "\" y1=\"" + px(kMarginTop + plot_h) + "\" x2=\"" +
           px(kMarginLeft + plot_w) + "\" y2=\"" + px(kMarginTop + plot_h) +
           "\" stroke=\"black\"/>\n";
    out += "<line x1=\"" + px(kMarginLeft) + "\" y1=\"" + px(kMarginTop) + "\" x2=\"" +
           px(kMarginLeft) + "\" y2=\"" + px(kMarginTop + plot_h) + "\" stroke=\"black\"/>\n";

    if (!title.empty()) {
        out += text_elem(kWidth / 2.0, 24.0, "middle", " font-size=\"15\"", title);
    }
    out += text_elem(kMarginLeft + plot_w / 2.0, kHeight - 14.0, "middle", "", x_label);
    out += text_elem(16.0, kMarginTop + plot_h / 2.0, "middle",
                     " transform=\"rotate(-90 16 " + px(kMarginTop + plot_h / 2.0) + ")\"",
                     y_label);

    for (size_t si = 0; si < series.size(); ++si) {
        const PlotSeries& s = series[si];
        const std::string color =
            s.color.empty() ? kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))] : s.color;
        if (s.line) {
            std::string points;
            for (size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                if (!points.empty()) points += " ";
                points += px(sx(s.x[i])) + "," + px(sy(s.y[i]));
            }
            if (!points.empty())
                out += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + color +
                       "\" stroke-width=\"1.5\"/>\n";
        } else {
            for (size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                out += "<circle cx=\"" + px(sx(s.x[i])) + "\" cy=\"" + px(sy(s.y[i])) +
                       "\" r=\"3\" fill=\"" + color + "\"/>\n";
            }
        }
    }

    double legend_y = kMarginTop + 8.0;
    for (size_t si = 0; si < series.size(); ++si) {
        const PlotSeries& s = series[si];
        if (s.label.empty()) continue;
        const std::string color =
            s.color.empty() ? kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))] : s.color;
        const double lx = kWidth - kMarginRight - 170.0;
        if (s.line) {
            out += "<line x1=\"" + px(lx) + "\" y1=\"" + px(legend_y + 4.0) + "\" x2=\"" +
                   px(lx + 18.0) + "\" y2=\"" + px(legend_y + 4.0) + "\" stroke=\"" + color +
                   "\" stroke-width=\"1.5\"/>\n";
        } else {
            out += "<circle cx=\"" + px(lx + 9.0) + "\" cy=\"" + px(legend_y + 4.0) +
                   "\" r=\"3\" fill=\"" + color + "\"/>\n";
        }
        out += text_elem(lx + 24.0, legend_y + 8.0, "start", "", s.label);
        legend_y += 18.0;
    }

    out += "</svg>\n";
    write_text_file(path, out);
}

std::array<int, 3> lab_to_srgb(double lab_l, double lab_a, double lab_b) {
    const double fy = (lab_l + 16.0) / 116.0;
    const double fx = fy + lab_a / 500.0;
    const double fz = fy - lab_b / 200.0;
    const auto f_inv = [](double t) {
        return t > 6.0 / 29.0 ? t * t * t : 3.0 * (6.0 / 29.0) * (6.0 / 29.0) * (t - 4.0 / 29.0);
    };
    const double x = 0.95047 * f_inv(fx);
    const double y = f_inv(fy);
    const double z = 1.08883 * f_inv(fz);

    double lin[3];
    lin[0] = 3.2404542 * x - 1.5371385 * y - 0.4985314 * z;
    lin[1] = -0.9692660 * x + 1.8760108 * y + 0.0415560 * z;
    lin[2] = 0.0556434 * x - 0.2040259 * y + 1.0572252 * z;

    std::array<int, 3> rgb{};
    for (int i = 0; i < 3; ++i) {
        double c = lin[i];
        c = c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(std::max(c, 0.0), 1.0 / 2.4) - 0.055;
        c = std::clamp(c, 0.0, 1.0);
        rgb[static_cast<size_t>(i)] = static_cast<int>(std::lround(c * 255.0));
    }
    return rgb;
}

void save_mode_map_svg(const std::string& path, const ModeMap& map, const ChipTable& chips,
                       bool dashed_border) {
    double w = 0.0, h = 0.0;
    map_extent(chips, w, h);
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(w) +
                      "\" height=\"" + px(h) + "\" viewBox=\"0 0 " + px(w) + " " + px(h) +
                      "\">\n";
    out += mode_map_group(map, chips, 0.0, 0.0, dashed_border);
    out += "</svg>\n";
    write_text_file(path, out);
}

void save_mode_map_pair_svg(const std::string& path, const ModeMap& agent, const ModeMap& human,
                            const ChipTable& chips) {
    double w = 0.0, h = 0.0;
    map_extent(chips, w, h);
    const double gap = 24.0;
    const double caption = 20.0;
    const double total_w = 2.0 * w + gap;
    const double total_h = h + caption;
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(total_w) +
                      "\" height=\"" + px(total_h) + "\" viewBox=\"0 0 " + px(total_w) + " " +
                      px(total_h) + "\">\n";
    out += text_elem(w / 2.0, 13.0, "middle", "", "agent");
    out += text_elem(w + gap + w / 2.0, 13.0, "middle", "", "human");
    out += mode_map_group(agent, chips, 0.0, caption, false);
    out += mode_map_group(human, chips, w + gap, caption, true);
    out += "</svg>\n";
    write_text_file(path, out);
}

}  // namespace ibsignal
