#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace taxeval {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// domain-model
struct TooFewSales : Error {
    TooFewSales(std::size_t got, std::size_t need)
        : Error("TooFewSales: panel has " + std::to_string(got) + " sales, needs " + std::to_string(need)),
          count(got) {}
    std::size_t count;
};
struct NonPositivePrice : Error {
    explicit NonPositivePrice(std::size_t record_index)
        : Error("NonPositivePrice: record " + std::to_string(record_index) +
                " has sale_price or assessed_value <= 0"),
          index(record_index) {}
    std::size_t index;
};
struct DateOutOfWindow : Error {
    explicit DateOutOfWindow(const std::string& detail) : Error("DateOutOfWindow: " + detail) {}
};
struct BadWeight : Error {
    explicit BadWeight(std::size_t record_index)
        : Error("BadWeight: record " + std::to_string(record_index) + " has non-finite or non-positive weight") {}
};

// equity-metrics
struct EmptyInput : Error {
    explicit EmptyInput(const std::string& op) : Error("EmptyInput: " + op) {}
};
struct DegenerateRegressor : Error {
    explicit DegenerateRegressor(const std::string& detail) : Error("DegenerateRegressor: " + detail) {}
};

// tradeoff-decomposition
struct LengthMismatch : Error {
    explicit LengthMismatch(const std::string& detail) : Error("LengthMismatch: " + detail) {}
};
struct TruthMismatch : Error {
    TruthMismatch() : Error("TruthMismatch: prediction sets do not share the same truth vector") {}
};

// assessment-pipeline
struct SingleYearPanel : Error {
    SingleYearPanel() : Error("SingleYearPanel: chronological split needs at least two calendar years") {}
};
struct AllMissingColumn : Error {
    explicit AllMissingColumn(const std::string& column) : Error("AllMissingColumn: " + column) {}
};
struct NonConvergence : Error {
    explicit NonConvergence(std::size_t sweeps)
        : Error("NonConvergence: coordinate descent hit max sweeps (" + std::to_string(sweeps) + ")") {}
};
struct SchemaMismatch : Error {
    explicit SchemaMismatch(const std::string& detail) : Error("SchemaMismatch: " + detail) {}
};
struct BudgetZero : Error {
    BudgetZero() : Error("BudgetZero: tuner budget must be at least 1") {}
};

// inference-stats
struct DegenerateStatistic : Error {
    DegenerateStatistic() : Error("DegenerateStatistic: bootstrap distribution has zero variance") {}
};

// cli-io
struct MissingColumn : Error {
    explicit MissingColumn(const std::string& column) : Error("MissingColumn: " + column) {}
};
struct DuplicateBlockGroupRow : Error {
    explicit DuplicateBlockGroupRow(const std::string& geoid) : Error("DuplicateBlockGroupRow: " + geoid) {}
};
struct IoFailure : Error {
    explicit IoFailure(const std::string& detail) : Error("IoFailure: " + detail) {}
};
struct ConfigError : Error {
    explicit ConfigError(const std::string& detail) : Error("ConfigError: " + detail) {}
};

} // namespace taxeval
