#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "renorm/cli/config.hpp"

namespace renorm::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int {
    Success = 0,
    ConfigFailure = 2,
    NotRenormalizableFailure = 3,
    PrecisionFailure = 4,
    AssertionFailure = 5,
};

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    static Table from_csv(std::string name, const std::string& text);
    std::string csv() const;
    /// Index of a column; throws std::out_of_range when absent.
    std::size_t column(const std::string& name) const;
};

/// Two-column plot data, "x y" per line.
struct PlotData {
    std::string name;
    std::vector<std::pair<std::string, std::string>> points;
};

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct RunRecord {
    ExperimentConfig config;
    std::vector<Table> tables;
    std::vector<PlotData> plots;
    std::vector<Check> checks;
    json report;     ///< experiment-specific summary values
    json timings;    ///< wall-clock, not part of the reproducible outputs
    bool passed() const;
    json to_json() const;
};

/// Runs the experiment described by the config (nothing is written).
RunRecord run(const ExperimentConfig& config);

/// Writes run.json, one CSV per table and one .dat per plot into the config's
/// output directory; returns the written paths.
std::vector<std::filesystem::path> write_outputs(const RunRecord& record);

/// Validation report of the configured map as JSON; throws like run() when
/// the family cannot be built.
json validate_family(const ExperimentConfig& config);

/// Per-column differences of the tables shared by two run records. Only
/// columns that differ are listed, so identical runs give an empty list.
/// Throws IncompatibleRuns when the experiment kinds differ.
json compare_runs(const json& a, const json& b);

/// Machine-readable description of an error escaping run(), with the exit
/// code the tool uses for it.
std::pair<int, json> failure_report(const std::exception& e);

}  // namespace renorm::cli
