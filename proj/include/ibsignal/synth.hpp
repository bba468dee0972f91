// Synthetic survey fixture: a procedural 330-chip stimulus sheet plus term
// files for 110 artificial languages (25 speakers each, prototype-based
// naming with per-speaker noise). Stands in for the real survey files, which
// are not redistributable with this repository; same formats, same shapes.
#pragma once

#include <string>

#include "ibsignal/wcs.hpp"

namespace ibsignal {

struct SynthConfig {
    int language_count = 110;
    int speakers_per_language = 25;
    uint64_t seed = 7;
};

// Deterministic chip sheet on the survey grid: achromatic column 0 spanning
// rows A-J, chromatic rows B-I across 40 hue columns, chroma peaking at
// mid lightness. Passes validate_wcs_layout.
ChipTable synth_chip_table();

void write_synth_chips(const std::string& path);

// Term file in the survey format. Each language has 2-11 terms anchored at
// farthest-point prototype chips; each speaker names every chip by nearest
// prototype with Gaussian distance noise and a small lapse rate, so rows of
// q(c|x) are soft near term boundaries.
void write_synth_terms(const std::string& path, const ChipTable& chips,
                       const SynthConfig& config);

}  // namespace ibsignal
