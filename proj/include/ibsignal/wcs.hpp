// World Color Survey data model: the 330-chip stimulus grid with CIELAB
// coordinates, and per-language naming systems q(c|x) built from term files.
// A NamingSystem is the common currency between human data and trained
// agents; every metric downstream consumes this one type.
#pragma once

#include <string>
#include <vector>

#include "ibsignal/random.hpp"
#include "ibsignal/tensor.hpp"

namespace ibsignal {

struct ChipRow {
    int id = 0;          // 1-based, contiguous
    char grid_row = 0;   // 'A'..'J'
    int grid_col = 0;    // 0..40
    double lab_l = 0.0;
    double lab_a = 0.0;
    double lab_b = 0.0;
};

class ChipTable {
public:
    // Validates: ids unique and contiguous from 1, finite CIELAB, grid codes
    // in range. Rows are stored sorted by id, so index == id - 1.
    static ChipTable from_rows(std::vector<ChipRow> rows);

    int count() const { return static_cast<int>(chips_.size()); }
    const ChipRow& chip(int index) const { return chips_[static_cast<size_t>(index)]; }
    const std::vector<ChipRow>& chips() const { return chips_; }

    // CIELAB divided by 100; the network-facing representation.
    const Tensor& scaled_lab(int index) const { return scaled_[static_cast<size_t>(index)]; }

    int index_of_id(int id) const;  // throws DataError for unknown ids

private:
    std::vector<ChipRow> chips_;
    std::vector<Tensor> scaled_;
};

// Tab-separated chip file: chip number, grid code, L*, a*, b*.
// Lines starting with '#' are comments.
ChipTable load_chips(const std::string& path);

// Full-survey grid checks (330 chips, achromatic column 0 for rows A-J, rows
// B-I spanning columns 1-40, rows A and J only at column 0). Applied at
// ingest; toy tables used in tests skip this.
void validate_wcs_layout(const ChipTable& table);

void save_chips_tsv(const std::string& path, const ChipTable& table);

struct NamingSystem {
    int signal_count = 0;
    std::vector<double> q;   // [chip_count x signal_count] row-major, rows sum to 1
    std::vector<double> px;  // prior over chips, sums to 1

    int chip_count() const {
        return signal_count == 0 ? 0 : static_cast<int>(q.size()) / signal_count;
    }
    double q_at(int chip, int signal) const {
        return q[static_cast<size_t>(chip) * signal_count + signal];
    }
    double& q_at(int chip, int signal) {
        return q[static_cast<size_t>(chip) * signal_count + signal];
    }

    static NamingSystem uniform_prior(int chip_count, int signal_count);
    void validate(double tol = 1e-9) const;
};

// Tab-separated term file: language number, speaker number, chip number,
// term token. q(c|x) is the empirical fraction of the language's speakers
// using each term for chip x; the prior is uniform. Tokens are interned to
// dense signal ids in order of first appearance.
NamingSystem load_language_naming(const std::string& path, int language_id,
                                  const ChipTable& chips);

// Every language in the file, in one pass, keyed by language id.
std::vector<std::pair<int, NamingSystem>> load_all_language_naming(const std::string& path,
                                                                   const ChipTable& chips);

std::vector<int> list_term_file_languages(const std::string& path);

// NamingSystem CSV (header chip_id,signal_id,prob), all cells written, exact
// round trip.
void save_naming_csv(const std::string& path, const NamingSystem& system);
NamingSystem load_naming_csv(const std::string& path, int chip_count);

struct ReferenceTrial {
    int target_id = 0;      // chip ids, never equal
    int distractor_id = 0;
    bool target_first = false;  // presentation order bit
};

// Target and distractor uniform without replacement, order uniform.
ReferenceTrial sample_trial(const ChipTable& chips, RandomSource& rng);

}  // namespace ibsignal
