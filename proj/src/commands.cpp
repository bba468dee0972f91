#include "ibsignal/commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ibsignal/agents.hpp"
#include "ibsignal/checkpoint.hpp"
#include "ibsignal/csvio.hpp"
#include "ibsignal/errors.hpp"
#include "ibsignal/ib_frontier.hpp"
#include "ibsignal/svg.hpp"
#include "ibsignal/wcs.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ibsignal {

namespace {

std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

json input_entry(const std::string& path) {
    return json{{"path", path}, {"fnv1a64", fnv1a64_hex(read_text_file(path))}};
}

void write_manifest(const fs::path& dir, const json& manifest) {
    write_text_file((dir / "manifest").string(), manifest.dump(2) + "\n");
}

json config_json(const TrainConfig& config) {
    return json{{"speaker", speaker_kind_name(config.agents.kind)},
                {"comm_dim", config.agents.comm_dim},
                {"codebook_size", config.agents.codebook_size},
                {"hidden", config.agents.hidden},
                {"lambda_u", config.lambda_u},
                {"lambda_i", config.lambda_i},
                {"lambda_c_initial", config.anneal.initial},
                {"lambda_c_final", config.anneal.final},
                {"anneal_start", config.anneal.start_epoch},
                {"anneal_end", config.anneal.end_epoch},
                {"epochs", config.epochs},
                {"batches_per_epoch", config.batches_per_epoch},
                {"batch_size", config.batch_size},
                {"learning_rate", config.learning_rate},
                {"seed", config.seed},
                {"eval_samples", config.eval_samples},
                {"checkpoint_every", config.checkpoint_every}};
}

std::string epoch_tag(int epoch) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d", epoch);
    return buf;
}

std::string lang_tag(int id) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%03d", id);
    return buf;
}

// Claims a fresh directory under out_dir, suffixing _2, _3, ... on collision.
// create_directory only succeeds for the process that made the directory, so
// concurrent claims cannot share a run dir.
RunInfo claim_run_dir(const fs::path& out_dir, const std::string& base_id) {
    fs::create_directories(out_dir);
    std::string id = base_id;
    for (int suffix = 2; !fs::create_directory(out_dir / id); ++suffix)
        id = base_id + "_" + std::to_string(suffix);
    const fs::path dir = out_dir / id;
    fs::create_directories(dir / "checkpoints");
    return RunInfo{id, dir.string()};
}

void run_one_training(const TrainConfig& config, const ChipTable& chips,
                      const MeaningDistribution& meanings, const std::string& run_dir) {
    std::string ib_csv = "epoch,complexity_bits,informativeness_bits\n";
    NamingSystem final_naming;
    const EpochCallback callback = [&](const EpochRecord& record, const Agents& agents,
                                       const NamingSystem& naming) {
        if (record.epoch % config.checkpoint_every == 0 || record.epoch == config.epochs)
            save_checkpoint(run_dir + "/checkpoints/epoch_" + epoch_tag(record.epoch) + ".txt",
                            agents);
        const double informativeness = ib_informativeness(naming.px, meanings, naming.q);
        ib_csv += std::to_string(record.epoch) + "," + format_double(record.complexity_bits) +
                  "," + format_double(informativeness) + "\n";
        if (record.epoch == config.epochs) final_naming = naming;
    };
    const TrainResult result = train(config, chips, callback);
    save_epochs_csv(run_dir + "/epochs.csv", result.records);
    write_text_file(run_dir + "/epochs_ib.csv", ib_csv);
    save_naming_csv(run_dir + "/naming.csv", final_naming);
}

int parse_name_number(const std::string& name, const std::string& prefix,
                      const std::string& suffix) {
    if (name.size() <= prefix.size() + suffix.size()) return -1;
    if (name.rfind(prefix, 0) != 0) return -1;
    if (name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) return -1;
    const std::string digits = name.substr(prefix.size(), name.size() - prefix.size() - suffix.size());
    if (digits.empty()) return -1;
    int value = 0;
    for (char c : digits) {
        if (c < '0' || c > '9') return -1;
        value = value * 10 + (c - '0');
    }
    return value;
}

// (number, path) pairs for directory entries shaped <prefix>N<suffix>, sorted
// by number.
std::vector<std::pair<int, std::string>> numbered_files(const fs::path& dir,
                                                        const std::string& prefix,
                                                        const std::string& suffix) {
    std::vector<std::pair<int, std::string>> files;
    if (!fs::is_directory(dir)) return files;
    for (const fs::directory_entry& entry : fs::directory_iterator(dir)) {
        const int number = parse_name_number(entry.path().filename().string(), prefix, suffix);
        if (number >= 0) files.emplace_back(number, entry.path().string());
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::string file_stem(const std::string& path) { return fs::path(path).stem().string(); }

}  // namespace

IngestSummary cmd_ingest(const std::string& chips_path, const std::string& terms_path,
                         const std::string& out_dir) {
    const ChipTable chips = load_chips(chips_path);
    validate_wcs_layout(chips);
    const std::vector<std::pair<int, NamingSystem>> languages =
        load_all_language_naming(terms_path, chips);

    const fs::path out(out_dir);
    fs::create_directories(out / "languages");
    json artifacts = {{"chips", "chips.tsv"}, {"languages", "languages/"}, {"summary", "summary.txt"}};
    write_manifest(out, json{{"kind", "ingest"},
                             {"inputs", {{"chips", input_entry(chips_path)},
                                         {"terms", input_entry(terms_path)}}},
                             {"artifacts", artifacts}});

    save_chips_tsv((out / "chips.tsv").string(), chips);
    IngestSummary summary;
    summary.chip_count = chips.count();
    for (const auto& [id, naming] : languages) {
        save_naming_csv((out / "languages" / ("lang_" + lang_tag(id) + ".csv")).string(), naming);
        summary.language_ids.push_back(id);
    }
    write_text_file((out / "summary.txt").string(),
                    "chips " + std::to_string(summary.chip_count) + "\nlanguages " +
                        std::to_string(summary.language_ids.size()) + "\n");
    return summary;
}

std::vector<RunInfo> cmd_train(const std::string& config_path, const TrainOverrides& overrides,
                               const std::string& chips_path, const std::string& out_dir,
                               int parallel_seeds) {
    if (parallel_seeds < 1) throw DegenerateInputError("parallel_seeds must be >= 1");
    TrainConfig base = config_path.empty() ? TrainConfig{} : load_train_config(config_path);
    json flags = json::object();
    if (overrides.seed) {
        base.seed = *overrides.seed;
        flags["seed"] = *overrides.seed;
    }
    if (overrides.lambda_u) {
        base.lambda_u = *overrides.lambda_u;
        flags["lambda-u"] = *overrides.lambda_u;
    }
    if (overrides.lambda_i) {
        base.lambda_i = *overrides.lambda_i;
        flags["lambda-i"] = *overrides.lambda_i;
    }
    if (overrides.lambda_c_initial) {
        base.anneal.initial = *overrides.lambda_c_initial;
        flags["lambda-c-initial"] = *overrides.lambda_c_initial;
    }
    if (overrides.lambda_c_final) {
        base.anneal.final = *overrides.lambda_c_final;
        flags["lambda-c-final"] = *overrides.lambda_c_final;
    }
    if (overrides.epochs) {
        base.epochs = *overrides.epochs;
        flags["epochs"] = *overrides.epochs;
    }
    if (overrides.speaker) {
        base.agents.kind = parse_speaker_kind(*overrides.speaker);
        flags["speaker"] = *overrides.speaker;
    }
    base.validate();

    const ChipTable chips = load_chips(chips_path);
    const MeaningDistribution meanings = build_meanings(chips, kMeaningSigma);
    const json chips_entry = input_entry(chips_path);

    std::vector<RunInfo> runs;
    std::vector<TrainConfig> configs;
    for (int i = 0; i < parallel_seeds; ++i) {
        TrainConfig config = base;
        config.seed = base.seed + static_cast<std::uint64_t>(i);
        const std::string base_id =
            speaker_kind_name(config.agents.kind) + "_s" + std::to_string(config.seed);
        RunInfo info = claim_run_dir(out_dir, base_id);

        json inputs = {{"chips", chips_entry}};
        if (!config_path.empty()) inputs["config"] = input_entry(config_path);
        write_manifest(info.run_dir, json{{"kind", "train"},
                                          {"run_id", info.run_id},
                                          {"seed", config.seed},
                                          {"flags", flags},
                                          {"config", config_json(config)},
                                          {"inputs", inputs},
                                          {"artifacts",
                                           {{"epochs", "epochs.csv"},
                                            {"epochs_ib", "epochs_ib.csv"},
                                            {"naming", "naming.csv"},
                                            {"checkpoints", "checkpoints/"}}}});
        runs.push_back(std::move(info));
        configs.push_back(std::move(config));
    }

    if (parallel_seeds == 1) {
        run_one_training(configs[0], chips, meanings, runs[0].run_dir);
        return runs;
    }
    std::vector<std::exception_ptr> errors(static_cast<size_t>(parallel_seeds));
    std::vector<std::thread> workers;
    for (int i = 0; i < parallel_seeds; ++i)
        workers.emplace_back([&, i] {
            try {
                run_one_training(configs[static_cast<size_t>(i)], chips, meanings,
                                 runs[static_cast<size_t>(i)].run_dir);
            } catch (...) {
                errors[static_cast<size_t>(i)] = std::current_exception();
            }
        });
    for (std::thread& worker : workers) worker.join();
    for (const std::exception_ptr& error : errors)
        if (error) std::rethrow_exception(error);
    return runs;
}

std::string cmd_frontier(double sigma, const std::string& chips_path, const std::string& out_dir,
                         std::uint64_t seed) {
    const ChipTable chips = load_chips(chips_path);
    const MeaningDistribution meanings = build_meanings(chips, sigma);
    const std::vector<double> betas = default_beta_schedule();

    const fs::path out(out_dir);
    fs::create_directories(out);
    write_manifest(out, json{{"kind", "frontier"},
                             {"seed", seed},
                             {"config",
                              {{"sigma", sigma},
                               {"clusters", kFrontierClusters},
                               {"beta_count", betas.size()}}},
                             {"inputs", {{"chips", input_entry(chips_path)}}},
                             {"artifacts", {{"csv", "frontier.csv"}, {"svg", "frontier.svg"}}}});

    const std::vector<double> px(static_cast<size_t>(chips.count()),
                                 1.0 / static_cast<double>(chips.count()));
    RandomSource rng(seed, 0);
    const std::vector<IBSolution> frontier =
        compute_frontier(px, meanings, betas, kFrontierClusters, rng);

    const std::string csv_path = (out / "frontier.csv").string();
    save_frontier_csv(csv_path, frontier);

    PlotSeries curve;
    curve.label = "IB frontier";
    curve.color = "#000000";
    curve.line = true;
    for (const IBSolution& solution : frontier) {
        curve.x.push_back(solution.complexity_bits);
        curve.y.push_back(solution.informativeness_bits);
    }
    save_plot_svg((out / "frontier.svg").string(), "information plane", "complexity (bits)",
                  "informativeness (bits)", {curve});
    return csv_path;
}

CompareSummary cmd_compare(const std::string& run_dir, const std::string& languages_dir,
                           const std::string& chips_path, const std::string& out_dir) {
    const fs::path run(run_dir);
    if (!fs::exists(run / "manifest"))
        throw NotFoundError("no run manifest under " + run_dir);
    std::uint64_t seed = 0;
    int eval_samples = 0;
    std::string run_id;
    try {
        const json manifest = json::parse(read_text_file((run / "manifest").string()));
        seed = manifest.at("seed").get<std::uint64_t>();
        eval_samples = manifest.at("config").at("eval_samples").get<int>();
        run_id = manifest.at("run_id").get<std::string>();
    } catch (const json::exception& e) {
        throw DataError("unreadable run manifest under " + run_dir + ": " + e.what());
    }

    const std::vector<std::pair<int, std::string>> checkpoints =
        numbered_files(run / "checkpoints", "epoch_", ".txt");
    if (checkpoints.empty()) throw DataError("no checkpoints under " + run_dir);
    const std::vector<std::pair<int, std::string>> languages =
        numbered_files(languages_dir, "lang_", ".csv");
    if (languages.empty()) throw DataError("no language files under " + languages_dir);

    const ChipTable chips = load_chips(chips_path);

    const fs::path out(out_dir);
    fs::create_directories(out / "maps");
    write_manifest(out, json{{"kind", "compare"},
                             {"seed", seed},
                             {"config", {{"run", run_dir}, {"eval_samples", eval_samples}}},
                             {"inputs",
                              {{"chips", input_entry(chips_path)},
                               {"run_manifest", input_entry((run / "manifest").string())},
                               {"languages", json{{"path", languages_dir}}}}},
                             {"artifacts",
                              {{"match_table", "match_table.csv"},
                               {"maps", "maps/"},
                               {"r2", "r2.csv"}}}});

    // The naming system of each checkpoint, estimated with the same rng
    // stream the run used at that epoch.
    const RandomSource eval_base = RandomSource(seed, 0).split(3);
    std::vector<NamingSystem> namings;
    std::map<int, size_t> epoch_index;
    Agents final_agents;
    for (const auto& [epoch, path] : checkpoints) {
        Agents agents = load_checkpoint(path);
        RandomSource rng = eval_base.split(static_cast<std::uint64_t>(epoch));
        epoch_index[epoch] = namings.size();
        namings.push_back(agent_naming_system(agents.speaker, chips, eval_samples, rng));
        if (epoch == checkpoints.back().first) final_agents = std::move(agents);
    }
    std::vector<AgentSystemRef> refs;
    for (size_t i = 0; i < checkpoints.size(); ++i)
        refs.push_back(AgentSystemRef{run_id, checkpoints[i].first, &namings[i]});

    CompareSummary summary;
    for (const auto& [language_id, path] : languages) {
        const NamingSystem human = load_naming_csv(path, chips.count());
        const MatchResult match = best_match(language_id, human, refs);
        const NamingSystem& agent = namings[epoch_index.at(match.epoch)];

        const ModeMap agent_map = mode_map(agent, chips);
        const ModeMap human_map = mode_map(human, chips);
        const std::string tag = lang_tag(language_id);
        save_mode_map_pair_svg((out / "maps" / ("lang_" + tag + ".svg")).string(), agent_map,
                               human_map, chips);
        save_mode_map_csv((out / "maps" / ("lang_" + tag + "_agent.csv")).string(), agent_map,
                          chips);
        save_mode_map_csv((out / "maps" / ("lang_" + tag + "_human.csv")).string(), human_map,
                          chips);
        summary.matches.push_back(match);
    }
    save_match_table_csv((out / "match_table.csv").string(), summary.matches);

    summary.speaker_kind = speaker_kind_name(final_agents.speaker.kind);
    summary.final_epoch = checkpoints.back().first;
    try {
        summary.r_squared = comm_color_correlation(namings.back(), chips,
                                                   signal_embeddings(final_agents.speaker));
    } catch (const DegenerateInputError&) {
        // Collapsed codes (< 2 used signals) have no defined correlation.
        summary.r_squared = std::nan("");
    }
    write_text_file((out / "r2.csv").string(),
                    "kind,epoch,r_squared\n" + summary.speaker_kind + "," +
                        std::to_string(summary.final_epoch) + "," +
                        format_double(summary.r_squared) + "\n");
    return summary;
}

void cmd_plot(const std::vector<PlotSeriesSpec>& series, const std::string& title,
              const std::string& x_label, const std::string& y_label,
              const std::string& out_svg) {
    if (series.empty()) throw DegenerateInputError("cmd_plot: no series given");
    std::vector<PlotSeries> drawn;
    for (const PlotSeriesSpec& spec : series) {
        const CsvTable table = read_csv(spec.csv_path);
        const int xi = table.column(spec.x_column);
        if (xi < 0) throw DataError(spec.csv_path + ": no column '" + spec.x_column + "'");
        const int yi = table.column(spec.y_column);
        if (yi < 0) throw DataError(spec.csv_path + ": no column '" + spec.y_column + "'");
        PlotSeries s;
        s.label = spec.label.empty() ? file_stem(spec.csv_path) : spec.label;
        s.line = spec.line;
        for (size_t r = 0; r < table.rows.size(); ++r) {
            const long line = static_cast<long>(r) + 2;
            s.x.push_back(parse_double(table.rows[r][static_cast<size_t>(xi)], spec.csv_path, line));
            s.y.push_back(parse_double(table.rows[r][static_cast<size_t>(yi)], spec.csv_path, line));
        }
        drawn.push_back(std::move(s));
    }
    save_plot_svg(out_svg, title, x_label.empty() ? series[0].x_column : x_label,
                  y_label.empty() ? series[0].y_column : y_label, drawn);
}

}  // namespace ibsignal
