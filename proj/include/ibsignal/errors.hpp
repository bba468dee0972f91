// Error types shared across the library. The CLI maps these to exit codes:
// user/input problems (parse, missing data) exit 2, internal/numeric failures exit 1.
#pragma once

#include <stdexcept>
#include <string>

namespace ibsignal {

struct ParseError : std::runtime_error {
    ParseError(const std::string& path, long line, const std::string& what)
        : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
          path(path),
          line(line) {}
    std::string path;
    long line;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotFoundError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Requested quantity has no defined value (e.g. gNID of two constant systems).
struct UndefinedResultError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateInputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct TrainingDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ibsignal
