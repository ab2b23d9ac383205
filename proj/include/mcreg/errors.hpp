#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mcreg {

// Root of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class NotPositiveDefiniteError : public Error {
public:
    NotPositiveDefiniteError(std::size_t pivot, double value)
        : Error("matrix is not positive definite: pivot " + std::to_string(pivot) +
                " = " + std::to_string(value)),
          pivot_(pivot), value_(value) {}

    std::size_t pivot() const noexcept { return pivot_; }
    double value() const noexcept { return value_; }

private:
    std::size_t pivot_;
    double value_;
};

// Coordinate descent ran out of sweeps. Carries the last iterate so callers
// can inspect how far from optimal it was.
class ConvergenceError : public Error {
public:
    ConvergenceError(std::vector<double> last_iterate, double max_violation, std::size_t sweeps)
        : Error("coordinate descent did not converge after " + std::to_string(sweeps) +
                " sweeps (max KKT violation " + std::to_string(max_violation) + ")"),
          last_iterate_(std::move(last_iterate)), max_violation_(max_violation) {}

    const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }
    double max_violation() const noexcept { return max_violation_; }

private:
    std::vector<double> last_iterate_;
    double max_violation_;
};

// A per-response fit failed inside a multi-response procedure.
class ResponseFitError : public Error {
public:
    ResponseFitError(std::string stage, std::size_t response, const std::string& what)
        : Error(stage + ": response " + std::to_string(response) + ": " + what),
          stage_(std::move(stage)), response_(response) {}

    const std::string& stage() const noexcept { return stage_; }
    std::size_t response() const noexcept { return response_; }

private:
    std::string stage_;
    std::size_t response_;
};

class DegenerateFitError : public Error {
public:
    using Error::Error;
};

class TuningError : public Error {
public:
    using Error::Error;
};

class SignConflictError : public Error {
public:
    explicit SignConflictError(std::vector<std::pair<std::size_t, std::size_t>> pairs)
        : Error("sign conflict in " + std::to_string(pairs.size()) + " response pair(s)"),
          pairs_(std::move(pairs)) {}

    const std::vector<std::pair<std::size_t, std::size_t>>& pairs() const noexcept { return pairs_; }

private:
    std::vector<std::pair<std::size_t, std::size_t>> pairs_;
};

// Malformed CSV / JSON input. Row and column are 1-based; 0 means "not applicable".
class IngestionError : public Error {
public:
    IngestionError(const std::string& source, std::size_t row, std::size_t col, const std::string& what)
        : Error(source + ":" + std::to_string(row) + ":" + std::to_string(col) + ": " + what),
          row_(row), col_(col) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t col() const noexcept { return col_; }

private:
    std::size_t row_;
    std::size_t col_;
};

// A file could not be opened, read or written.
class FileError : public Error {
public:
    FileError(const std::string& path, const std::string& what) : Error(path + ": " + what) {}
};

}  // namespace mcreg
