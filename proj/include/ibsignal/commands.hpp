// Command layer behind the CLI binary: ingestion, training runs, frontier
// computation, run-versus-human comparison, and chart emission. Each command
// owns one output directory, writes its manifest before any other artifact,
// and is deterministic given (inputs, flags, seed). Errors surface as the
// library's exception types; the binary maps them to exit codes.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ibsignal/metrics.hpp"
#include "ibsignal/training.hpp"

namespace ibsignal {

struct IngestSummary {
    int chip_count = 0;
    std::vector<int> language_ids;
};

// Validates the survey pair and writes chips.tsv, languages/lang_<id>.csv
// (one NamingSystem CSV per language) and summary.txt under out_dir.
IngestSummary cmd_ingest(const std::string& chips_path, const std::string& terms_path,
                         const std::string& out_dir);

// Flag overrides layered on top of the config file; unset fields keep the
// file's (or default) values. Set fields are echoed into the manifest.
struct TrainOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<double> lambda_u;
    std::optional<double> lambda_i;
    std::optional<double> lambda_c_initial;
    std::optional<double> lambda_c_final;
    std::optional<int> epochs;
    std::optional<std::string> speaker;
};

struct RunInfo {
    std::string run_id;
    std::string run_dir;
};

// Trains one run per seed (seed, seed+1, ... for parallel_seeds > 1, each on
// its own thread) and writes runs/<run_id>/{manifest,epochs.csv,epochs_ib.csv,
// checkpoints/,naming.csv}. run_id is <speaker>_s<seed>, suffixed _2, _3, ...
// when the directory already exists.
std::vector<RunInfo> cmd_train(const std::string& config_path, const TrainOverrides& overrides,
                               const std::string& chips_path, const std::string& out_dir,
                               int parallel_seeds = 1);

// Full deterministic-annealing sweep; writes manifest, frontier.csv and
// frontier.svg. Non-converged betas keep their rows, flagged in the CSV.
// Returns the CSV path.
std::string cmd_frontier(double sigma, const std::string& chips_path, const std::string& out_dir,
                         std::uint64_t seed = 1);

struct CompareSummary {
    std::vector<MatchResult> matches;  // one per language, ordered by id
    std::string speaker_kind;
    int final_epoch = 0;
    double r_squared = 0.0;  // communication/color correlation at final_epoch
};

// Scores every checkpoint of a completed run against every ingested language:
// writes match_table.csv, paired mode maps (SVG plus agent/human CSVs) under
// maps/, and r2.csv. Checkpoint naming systems reuse the run's evaluation rng
// streams, so they reproduce the training-time estimates exactly.
CompareSummary cmd_compare(const std::string& run_dir, const std::string& languages_dir,
                           const std::string& chips_path, const std::string& out_dir);

struct PlotSeriesSpec {
    std::string csv_path;
    std::string x_column;
    std::string y_column;
    bool line = false;
    std::string label;  // defaults to the file stem
};

// Overlay chart from CSV columns; unknown columns are DataErrors.
void cmd_plot(const std::vector<PlotSeriesSpec>& series, const std::string& title,
              const std::string& x_label, const std::string& y_label,
              const std::string& out_svg);

}  // namespace ibsignal
