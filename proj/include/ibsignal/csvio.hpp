// Minimal CSV/TSV helpers. All artifact files are plain numeric tables with
// no quoting, so a field split is enough. Doubles are written with %.17g so
// a write/read cycle reproduces them bit-exactly.
#pragma once

#include <string>
#include <vector>

namespace ibsignal {

std::string format_double(double v);      // %.17g, round-trip exact
std::string format_double_short(double v);  // %.9g, for logs and charts

double parse_double(const std::string& field, const std::string& path, long line);
long parse_long(const std::string& field, const std::string& path, long line);

std::vector<std::string> split_fields(const std::string& line, char sep);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // -1 when the column is absent.
    int column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

// Whole-file helpers.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace ibsignal
