// ibsignal: train color-game agents, compute the IB frontier, and compare
// runs against survey languages. Subcommands: ingest, train, frontier,
// compare, plot. IBSIGNAL_DATA_DIR supplies default dataset paths; exit codes
// are 0 success, 1 internal/numeric failure, 2 user/input error.
#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>
#include <vector>

#include "ibsignal/commands.hpp"
#include "ibsignal/csvio.hpp"
#include "ibsignal/errors.hpp"
#include "ibsignal/ib_frontier.hpp"

using namespace ibsignal;

namespace {

std::string data_dir() {
    const char* dir = std::getenv("IBSIGNAL_DATA_DIR");
    return dir ? dir : "";
}

// Flag value if given, otherwise <IBSIGNAL_DATA_DIR>/<default_name>. Empty
// both ways is a user error.
std::string resolve_path(const std::string& flag_value, const std::string& flag_name,
                         const std::string& default_name) {
    if (!flag_value.empty()) return flag_value;
    if (!data_dir().empty()) return data_dir() + "/" + default_name;
    throw DataError("no " + flag_name + " given and IBSIGNAL_DATA_DIR is unset");
}

PlotSeriesSpec parse_series_spec(const std::string& spec) {
    const std::vector<std::string> fields = split_fields(spec, ':');
    if (fields.size() < 3 || fields.size() > 5)
        throw DataError("series spec '" + spec + "' is not csv:xcol:ycol[:line|points[:label]]");
    PlotSeriesSpec parsed;
    parsed.csv_path = fields[0];
    parsed.x_column = fields[1];
    parsed.y_column = fields[2];
    if (fields.size() >= 4) {
        if (fields[3] == "line") parsed.line = true;
        else if (fields[3] != "points")
            throw DataError("series spec '" + spec + "': style must be line or points");
    }
    if (fields.size() == 5) parsed.label = fields[4];
    return parsed;
}

double median_gnid(std::vector<MatchResult> matches) {
    std::sort(matches.begin(), matches.end(),
              [](const MatchResult& a, const MatchResult& b) { return a.gnid_value < b.gnid_value; });
    const size_t n = matches.size();
    if (n % 2 == 1) return matches[n / 2].gnid_value;
    return 0.5 * (matches[n / 2 - 1].gnid_value + matches[n / 2].gnid_value);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"color-game signaling agents, IB frontier, and survey comparison"};
    app.require_subcommand(1);

    std::string chips_flag, terms_flag, config_flag, out_flag, run_flag, languages_flag;
    std::string speaker_flag, title_flag, x_label_flag, y_label_flag;
    std::uint64_t seed_flag = 0;
    bool seed_given = false;
    double lambda_u = 0.0, lambda_i = 0.0, lambda_c_initial = 0.0, lambda_c_final = 0.0;
    double sigma = kMeaningSigma;
    int epochs = 0, parallel_seeds = 1;
    std::vector<std::string> series_specs;

    CLI::App* ingest = app.add_subcommand("ingest", "validate survey files and emit the bundle");
    ingest->add_option("--chips", chips_flag, "chip table (tab-separated)");
    ingest->add_option("--terms", terms_flag, "term file (tab-separated)");
    ingest->add_option("--out", out_flag, "output directory");

    CLI::App* train = app.add_subcommand("train", "train one or more reference-game runs");
    train->add_option("--chips", chips_flag, "chip table");
    train->add_option("--config", config_flag, "training config file");
    train->add_option("--out", out_flag, "runs directory")->default_val("runs");
    CLI::Option* seed_opt = train->add_option("--seed", seed_flag, "base rng seed");
    CLI::Option* lu_opt = train->add_option("--lambda-u", lambda_u, "utility weight");
    CLI::Option* li_opt = train->add_option("--lambda-i", lambda_i, "informativeness weight");
    CLI::Option* lci_opt =
        train->add_option("--lambda-c-initial", lambda_c_initial, "complexity weight at start");
    CLI::Option* lcf_opt =
        train->add_option("--lambda-c-final", lambda_c_final, "complexity weight after anneal");
    CLI::Option* epochs_opt = train->add_option("--epochs", epochs, "training epochs");
    CLI::Option* speaker_opt = train->add_option("--speaker", speaker_flag, "channel architecture")
                                   ->check(CLI::IsMember({"vqvib", "onehot"}));
    train->add_option("--parallel-seeds", parallel_seeds, "consecutive seeds run concurrently")
        ->check(CLI::PositiveNumber);

    CLI::App* frontier = app.add_subcommand("frontier", "compute the IB frontier for the chips");
    frontier->add_option("--chips", chips_flag, "chip table");
    frontier->add_option("--sigma", sigma, "meaning-space Gaussian width")
        ->default_val(kMeaningSigma);
    frontier->add_option("--seed", seed_flag, "annealing noise seed")->default_val(1);
    frontier->add_option("--out", out_flag, "output directory")->required();

    CLI::App* compare = app.add_subcommand("compare", "match run checkpoints to languages");
    compare->add_option("--run", run_flag, "completed run directory")->required();
    compare->add_option("--languages", languages_flag, "ingested language CSV directory");
    compare->add_option("--chips", chips_flag, "chip table");
    compare->add_option("--out", out_flag, "output directory")->required();

    CLI::App* plot = app.add_subcommand("plot", "overlay CSV columns in an SVG chart");
    plot->add_option("--series", series_specs, "csv:xcol:ycol[:line|points[:label]]")
        ->required()
        ->take_all();
    plot->add_option("--title", title_flag, "chart title");
    plot->add_option("--x-label", x_label_flag, "x axis label");
    plot->add_option("--y-label", y_label_flag, "y axis label");
    plot->add_option("--out", out_flag, "output SVG path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    seed_given = seed_opt->count() > 0;

    try {
        if (app.got_subcommand(ingest)) {
            const IngestSummary summary =
                cmd_ingest(resolve_path(chips_flag, "--chips", "chips.tsv"),
                           resolve_path(terms_flag, "--terms", "terms.tsv"),
                           resolve_path(out_flag, "--out", "."));
            std::printf("chips %d\nlanguages %zu\n", summary.chip_count,
                        summary.language_ids.size());
        } else if (app.got_subcommand(train)) {
            TrainOverrides overrides;
            if (seed_given) overrides.seed = seed_flag;
            if (lu_opt->count()) overrides.lambda_u = lambda_u;
            if (li_opt->count()) overrides.lambda_i = lambda_i;
            if (lci_opt->count()) overrides.lambda_c_initial = lambda_c_initial;
            if (lcf_opt->count()) overrides.lambda_c_final = lambda_c_final;
            if (epochs_opt->count()) overrides.epochs = epochs;
            if (speaker_opt->count()) overrides.speaker = speaker_flag;
            const std::vector<RunInfo> runs =
                cmd_train(config_flag, overrides, resolve_path(chips_flag, "--chips", "chips.tsv"),
                          out_flag, parallel_seeds);
            for (const RunInfo& run : runs)
                std::printf("run %s %s\n", run.run_id.c_str(), run.run_dir.c_str());
        } else if (app.got_subcommand(frontier)) {
            const std::string csv = cmd_frontier(
                sigma, resolve_path(chips_flag, "--chips", "chips.tsv"), out_flag, seed_flag);
            std::printf("frontier %s\n", csv.c_str());
        } else if (app.got_subcommand(compare)) {
            const CompareSummary summary =
                cmd_compare(run_flag, resolve_path(languages_flag, "--languages", "languages"),
                            resolve_path(chips_flag, "--chips", "chips.tsv"), out_flag);
            std::printf("matches %zu\nmedian_gnid %s\nr_squared %s %d %s\n",
                        summary.matches.size(),
                        format_double_short(median_gnid(summary.matches)).c_str(),
                        summary.speaker_kind.c_str(), summary.final_epoch,
                        format_double_short(summary.r_squared).c_str());
        } else if (app.got_subcommand(plot)) {
            std::vector<PlotSeriesSpec> series;
            for (const std::string& spec : series_specs)
                series.push_back(parse_series_spec(spec));
            cmd_plot(series, title_flag, x_label_flag, y_label_flag, out_flag);
            std::printf("plot %s\n", out_flag.c_str());
        }
    } catch (const ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const NotFoundError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const UndefinedResultError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
