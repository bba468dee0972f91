#include "ibsignal/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <vector>

#include "ibsignal/errors.hpp"
#include "ibsignal/random.hpp"

namespace ibsignal {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Lightness per grid row A..J and max chroma per row (zero at the
// achromatic extremes, peaking at mid lightness).
constexpr std::array<double, 10> kRowL = {96.0, 91.0, 81.0, 71.0, 61.0,
                                          51.0, 41.0, 31.0, 21.0, 15.0};
constexpr std::array<double, 10> kRowChroma = {0.0, 18.0, 30.0, 42.0, 50.0,
                                               50.0, 42.0, 30.0, 20.0, 0.0};

std::string make_token(RandomSource& rng) {
    static const char consonants[] = "bcdfghklmnprstvz";
    static const char vowels[] = "aeiou";
    std::string token;
    const int syllables = 1 + rng.uniform_int(2);
    for (int s = 0; s < syllables; ++s) {
        token += consonants[rng.uniform_int(16)];
        token += vowels[rng.uniform_int(5)];
    }
    return token;
}

double dist2(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    double total = 0.0;
    for (int d = 0; d < 3; ++d) {
        const double diff = a[d] - b[d];
        total += diff * diff;
    }
    return total;
}

}  // namespace

ChipTable synth_chip_table() {
    std::vector<ChipRow> rows;
    int next_id = 1;
    for (int r = 0; r < 10; ++r) {
        const char grid_row = static_cast<char>('A' + r);
        const int max_col = (grid_row == 'A' || grid_row == 'J') ? 0 : 40;
        for (int col = 0; col <= max_col; ++col) {
            ChipRow chip;
            chip.id = next_id++;
            chip.grid_row = grid_row;
            chip.grid_col = col;
            chip.lab_l = kRowL[static_cast<size_t>(r)];
            if (col > 0) {
                const double hue = 2.0 * kPi * (col - 1) / 40.0 + 0.12 * r;
                chip.lab_a = kRowChroma[static_cast<size_t>(r)] * std::cos(hue);
                chip.lab_b = kRowChroma[static_cast<size_t>(r)] * std::sin(hue);
            }
            rows.push_back(chip);
        }
    }
    ChipTable table = ChipTable::from_rows(std::move(rows));
    validate_wcs_layout(table);
    return table;
}

void write_synth_chips(const std::string& path) { save_chips_tsv(path, synth_chip_table()); }

void write_synth_terms(const std::string& path, const ChipTable& chips,
                       const SynthConfig& config) {
    if (config.language_count < 1 || config.speakers_per_language < 1)
        throw DegenerateInputError("write_synth_terms: counts must be positive");

    std::vector<std::array<double, 3>> lab(static_cast<size_t>(chips.count()));
    for (int x = 0; x < chips.count(); ++x) {
        const Tensor& t = chips.scaled_lab(x);
        lab[static_cast<size_t>(x)] = {t(0), t(1), t(2)};
    }

    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "#lang\tspeaker\tchip\tterm\n";

    for (int lang = 1; lang <= config.language_count; ++lang) {
        RandomSource rng(config.seed, static_cast<uint64_t>(lang));
        const int term_count = 2 + (lang - 1) % 10;

        std::vector<std::string> tokens;
        while (static_cast<int>(tokens.size()) < term_count) {
            std::string token = make_token(rng);
            if (std::find(tokens.begin(), tokens.end(), token) == tokens.end())
                tokens.push_back(std::move(token));
        }

        // Farthest-point prototypes seeded at a random chip, with a little
        // jitter so languages with the same seed chip still differ.
        std::vector<std::array<double, 3>> protos;
        protos.push_back(lab[static_cast<size_t>(rng.uniform_int(chips.count()))]);
        while (static_cast<int>(protos.size()) < term_count) {
            int farthest = 0;
            double farthest_dist = -1.0;
            for (int x = 0; x < chips.count(); ++x) {
                double nearest = dist2(lab[static_cast<size_t>(x)], protos[0]);
                for (size_t p = 1; p < protos.size(); ++p)
                    nearest = std::min(nearest, dist2(lab[static_cast<size_t>(x)], protos[p]));
                if (nearest > farthest_dist) {
                    farthest_dist = nearest;
                    farthest = x;
                }
            }
            protos.push_back(lab[static_cast<size_t>(farthest)]);
        }
        for (auto& proto : protos)
            for (double& coord : proto) coord += 0.03 * rng.normal();

        for (int speaker = 1; speaker <= config.speakers_per_language; ++speaker) {
            for (int x = 0; x < chips.count(); ++x) {
                int term = 0;
                if (rng.uniform() < 0.02) {
                    term = rng.uniform_int(term_count);
                } else {
                    double best = 1e300;
                    for (int t = 0; t < term_count; ++t) {
                        const double score =
                            std::sqrt(dist2(lab[static_cast<size_t>(x)],
                                            protos[static_cast<size_t>(t)])) +
                            0.05 * rng.normal();
                        if (score < best) {
                            best = score;
                            term = t;
                        }
                    }
                }
                out << lang << '\t' << speaker << '\t' << chips.chip(x).id << '\t'
                    << tokens[static_cast<size_t>(term)] << '\n';
            }
        }
    }
    if (!out) throw DataError("write failed: " + path);
}

}  // namespace ibsignal
