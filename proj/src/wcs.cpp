#include "ibsignal/wcs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "ibsignal/csvio.hpp"
#include "ibsignal/errors.hpp"

namespace ibsignal {

namespace {

// Iterates non-empty, non-comment lines of a tab-separated file.
template <typename Fn>
void for_each_data_line(const std::string& path, Fn fn) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("file not found: " + path);
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        fn(split_fields(line, '\t'), line_no);
    }
}

}  // namespace

ChipTable ChipTable::from_rows(std::vector<ChipRow> rows) {
    if (rows.empty()) throw DataError("chip table is empty");
    std::sort(rows.begin(), rows.end(), [](const ChipRow& a, const ChipRow& b) { return a.id < b.id; });
    for (size_t i = 0; i < rows.size(); ++i) {
        const ChipRow& r = rows[i];
        if (r.id != static_cast<int>(i) + 1) {
            if (i > 0 && rows[i - 1].id == r.id)
                throw DataError("duplicate chip id " + std::to_string(r.id));
            throw DataError("chip ids not contiguous from 1 (missing id " + std::to_string(i + 1) + ")");
        }
        if (r.grid_row < 'A' || r.grid_row > 'J')
            throw DataError("chip " + std::to_string(r.id) + ": grid row out of A-J");
        if (r.grid_col < 0 || r.grid_col > 40)
            throw DataError("chip " + std::to_string(r.id) + ": grid column out of 0-40");
        if (!std::isfinite(r.lab_l) || !std::isfinite(r.lab_a) || !std::isfinite(r.lab_b))
            throw DataError("chip " + std::to_string(r.id) + ": non-finite CIELAB");
    }
    ChipTable table;
    table.chips_ = std::move(rows);
    table.scaled_.reserve(table.chips_.size());
    for (const ChipRow& r : table.chips_)
        table.scaled_.push_back(Tensor::vec({r.lab_l / 100.0, r.lab_a / 100.0, r.lab_b / 100.0}));
    return table;
}

int ChipTable::index_of_id(int id) const {
    if (id < 1 || id > count()) throw DataError("unknown chip id " + std::to_string(id));
    return id - 1;
}

ChipTable load_chips(const std::string& path) {
    std::vector<ChipRow> rows;
    for_each_data_line(path, [&](const std::vector<std::string>& fields, long line_no) {
        if (fields.size() != 5) throw ParseError(path, line_no, "expected 5 tab-separated fields");
        ChipRow r;
        r.id = static_cast<int>(parse_long(fields[0], path, line_no));
        const std::string& grid = fields[1];
        if (grid.size() < 2 || grid[0] < 'A' || grid[0] > 'J')
            throw ParseError(path, line_no, "bad grid code '" + grid + "'");
        r.grid_row = grid[0];
        r.grid_col = static_cast<int>(parse_long(grid.substr(1), path, line_no));
        r.lab_l = parse_double(fields[2], path, line_no);
        r.lab_a = parse_double(fields[3], path, line_no);
        r.lab_b = parse_double(fields[4], path, line_no);
        rows.push_back(r);
    });
    if (rows.empty()) throw ParseError(path, 1, "no chip rows");
    return ChipTable::from_rows(std::move(rows));
}

void validate_wcs_layout(const ChipTable& table) {
    if (table.count() != 330)
        throw DataError("expected 330 chips, found " + std::to_string(table.count()));
    std::set<std::pair<char, int>> seen;
    for (const ChipRow& r : table.chips()) {
        if (!seen.insert({r.grid_row, r.grid_col}).second)
            throw DataError("duplicate grid position for chip " + std::to_string(r.id));
        if ((r.grid_row == 'A' || r.grid_row == 'J') && r.grid_col != 0)
            throw DataError("rows A and J are achromatic-only (chip " + std::to_string(r.id) + ")");
    }
    for (char row = 'A'; row <= 'J'; ++row)
        if (!seen.count({row, 0}))
            throw DataError(std::string("missing achromatic chip ") + row + "0");
    for (char row = 'B'; row <= 'I'; ++row)
        for (int col = 1; col <= 40; ++col)
            if (!seen.count({row, col}))
                throw DataError(std::string("missing chip ") + row + std::to_string(col));
}

void save_chips_tsv(const std::string& path, const ChipTable& table) {
    std::ostringstream out;
    out << "#chip\tgrid\tL\ta\tb\n";
    for (const ChipRow& r : table.chips()) {
        out << r.id << '\t' << r.grid_row << r.grid_col << '\t' << format_double(r.lab_l) << '\t'
            << format_double(r.lab_a) << '\t' << format_double(r.lab_b) << '\n';
    }
    write_text_file(path, out.str());
}

NamingSystem NamingSystem::uniform_prior(int chip_count, int signal_count) {
    NamingSystem s;
    s.signal_count = signal_count;
    s.q.assign(static_cast<size_t>(chip_count) * signal_count, 0.0);
    s.px.assign(static_cast<size_t>(chip_count), 1.0 / chip_count);
    return s;
}

void NamingSystem::validate(double tol) const {
    const int chips = chip_count();
    if (chips == 0 || static_cast<int>(px.size()) != chips)
        throw DataError("naming system: inconsistent sizes");
    for (int x = 0; x < chips; ++x) {
        double total = 0.0;
        for (int c = 0; c < signal_count; ++c) {
            const double v = q_at(x, c);
            if (!(v >= 0.0)) throw DataError("naming system: negative probability");
            total += v;
        }
        if (std::abs(total - 1.0) > tol)
            throw DataError("naming system: row " + std::to_string(x) + " sums to " + std::to_string(total));
    }
    double ptotal = 0.0;
    for (double v : px) {
        if (!(v >= 0.0)) throw DataError("naming system: negative prior");
        ptotal += v;
    }
    if (std::abs(ptotal - 1.0) > tol) throw DataError("naming system: prior does not sum to 1");
}

namespace {

// Token counts per chip for one language, tokens interned in first-appearance order.
struct LanguageCounts {
    std::unordered_map<std::string, int> token_ids;
    std::vector<std::unordered_map<int, long>> per_chip;

    void add(int chip_index, const std::string& token) {
        auto [it, inserted] = token_ids.try_emplace(token, static_cast<int>(token_ids.size()));
        per_chip[static_cast<size_t>(chip_index)][it->second] += 1;
    }
};

NamingSystem counts_to_naming(const LanguageCounts& counts, int language_id, int chip_count) {
    NamingSystem system =
        NamingSystem::uniform_prior(chip_count, static_cast<int>(counts.token_ids.size()));
    for (int x = 0; x < chip_count; ++x) {
        const auto& row = counts.per_chip[static_cast<size_t>(x)];
        long total = 0;
        for (const auto& [sig, n] : row) total += n;
        if (total == 0)
            throw DataError("language " + std::to_string(language_id) + ": chip " +
                            std::to_string(x + 1) + " has no naming data");
        for (const auto& [sig, n] : row)
            system.q_at(x, sig) = static_cast<double>(n) / static_cast<double>(total);
    }
    system.validate();
    return system;
}

// Streams a term file, dispatching (language, chip index, token) triples.
template <typename Fn>
void for_each_term_row(const std::string& path, const ChipTable& chips, Fn fn) {
    for_each_data_line(path, [&](const std::vector<std::string>& fields, long line_no) {
        if (fields.size() != 4) throw ParseError(path, line_no, "expected 4 tab-separated fields");
        const long lang = parse_long(fields[0], path, line_no);
        const long chip_id = parse_long(fields[2], path, line_no);
        fn(lang, chips.index_of_id(static_cast<int>(chip_id)), fields[3]);
    });
}

}  // namespace

NamingSystem load_language_naming(const std::string& path, int language_id,
                                  const ChipTable& chips) {
    LanguageCounts counts;
    counts.per_chip.resize(static_cast<size_t>(chips.count()));
    bool language_seen = false;
    for_each_term_row(path, chips, [&](long lang, int chip_index, const std::string& token) {
        if (lang != language_id) return;
        language_seen = true;
        counts.add(chip_index, token);
    });
    if (!language_seen)
        throw NotFoundError("language " + std::to_string(language_id) + " not present in " + path);
    return counts_to_naming(counts, language_id, chips.count());
}

std::vector<std::pair<int, NamingSystem>> load_all_language_naming(const std::string& path,
                                                                   const ChipTable& chips) {
    std::map<long, LanguageCounts> languages;
    for_each_term_row(path, chips, [&](long lang, int chip_index, const std::string& token) {
        LanguageCounts& counts = languages[lang];
        if (counts.per_chip.empty()) counts.per_chip.resize(static_cast<size_t>(chips.count()));
        counts.add(chip_index, token);
    });
    if (languages.empty()) throw DataError("no naming data in " + path);
    std::vector<std::pair<int, NamingSystem>> result;
    result.reserve(languages.size());
    for (const auto& [lang, counts] : languages)
        result.emplace_back(static_cast<int>(lang),
                            counts_to_naming(counts, static_cast<int>(lang), chips.count()));
    return result;
}

std::vector<int> list_term_file_languages(const std::string& path) {
    std::set<long> langs;
    for_each_data_line(path, [&](const std::vector<std::string>& fields, long line_no) {
        if (fields.size() != 4) throw ParseError(path, line_no, "expected 4 tab-separated fields");
        langs.insert(parse_long(fields[0], path, line_no));
    });
    return std::vector<int>(langs.begin(), langs.end());
}

void save_naming_csv(const std::string& path, const NamingSystem& system) {
    std::ostringstream out;
    out << "chip_id,signal_id,prob\n";
    const int chips = system.chip_count();
    for (int x = 0; x < chips; ++x)
        for (int c = 0; c < system.signal_count; ++c)
            out << (x + 1) << ',' << c << ',' << format_double(system.q_at(x, c)) << '\n';
    write_text_file(path, out.str());
}

NamingSystem load_naming_csv(const std::string& path, int chip_count) {
    CsvTable table = read_csv(path);
    const int chip_col = table.column("chip_id");
    const int sig_col = table.column("signal_id");
    const int prob_col = table.column("prob");
    if (chip_col < 0 || sig_col < 0 || prob_col < 0)
        throw ParseError(path, 1, "expected header chip_id,signal_id,prob");

    int max_signal = -1;
    for (const auto& row : table.rows)
        max_signal = std::max(max_signal, static_cast<int>(parse_long(row[sig_col], path, 0)));
    if (max_signal < 0) throw ParseError(path, 1, "no naming rows");

    NamingSystem system = NamingSystem::uniform_prior(chip_count, max_signal + 1);
    long line_no = 1;
    for (const auto& row : table.rows) {
        ++line_no;
        const long chip_id = parse_long(row[chip_col], path, line_no);
        if (chip_id < 1 || chip_id > chip_count)
            throw DataError(path + ": chip id " + std::to_string(chip_id) + " out of range");
        const long sig = parse_long(row[sig_col], path, line_no);
        system.q_at(static_cast<int>(chip_id) - 1, static_cast<int>(sig)) =
            parse_double(row[prob_col], path, line_no);
    }
    system.validate();
    return system;
}

ReferenceTrial sample_trial(const ChipTable& chips, RandomSource& rng) {
    const int n = chips.count();
    if (n < 2) throw DegenerateInputError("sample_trial: need at least 2 chips");
    const int target = rng.uniform_int(n);
    int distractor = rng.uniform_int(n - 1);
    if (distractor >= target) ++distractor;
    ReferenceTrial trial;
    trial.target_id = chips.chip(target).id;
    trial.distractor_id = chips.chip(distractor).id;
    trial.target_first = rng.bernoulli();
    return trial;
}

}  // namespace ibsignal
