// wcs_synth: writes the synthetic survey fixture (chips.tsv + terms.tsv) used
// in place of the real survey files.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <string>

#include "ibsignal/synth.hpp"
#include "ibsignal/wcs.hpp"

using namespace ibsignal;

int main(int argc, char** argv) {
    CLI::App app{"synthetic color-survey fixture generator"};
    std::string out_dir;
    SynthConfig config;
    app.add_option("--out", out_dir, "output directory")->required();
    app.add_option("--seed", config.seed, "generator seed")->default_val(7);
    app.add_option("--languages", config.language_count, "language count")->default_val(110);
    app.add_option("--speakers", config.speakers_per_language, "speakers per language")
        ->default_val(25);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 2 : 0;
    }

    try {
        std::filesystem::create_directories(out_dir);
        const std::string chips_path = out_dir + "/chips.tsv";
        const std::string terms_path = out_dir + "/terms.tsv";
        write_synth_chips(chips_path);
        write_synth_terms(terms_path, synth_chip_table(), config);
        std::printf("chips %s\nterms %s\n", chips_path.c_str(), terms_path.c_str());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
