#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "renorm/numerics/precision.hpp"

namespace renorm::cli {

using json = nlohmann::json;

enum class ExperimentKind { Convergence, Martingale, Denjoy, Combinatorics, Diagnostics };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

/// Map family as written in the config. Real parameters are kept as text and
/// parsed in the working arithmetic.
struct KoParamText {
    std::string amplitude, center, bend;
};

struct FamilySpec {
    std::string name;  ///< standard, affine, mobius, ko, ko-zero-mean
    /// "golden", "golden-tuned", or one decimal / "p/q" string per letter
    std::vector<std::string> lengths;
    std::vector<std::string> top, bottom;
    std::vector<std::string> slopes;        ///< affine
    std::vector<std::string> coefficients;  ///< mobius
    std::vector<std::string> image_widths;  ///< mobius, optional
    std::vector<KoParamText> ko;            ///< ko, ko-zero-mean
    std::string tune_lo = "0.6", tune_hi = "0.65";
    std::optional<std::size_t> tune_depth;  ///< default: depth + 4

    bool golden_tuned() const { return lengths.size() == 1 && lengths[0] == "golden-tuned"; }
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Convergence;
    FamilySpec family;
    PrecisionContext precision;
    std::size_t depth = 1;        ///< N
    std::size_t first_depth = 0;  ///< k, first depth reported
    std::uint64_t seed = 1;
    std::filesystem::path output = "out";
    /// convergence: "mobius" compares with F_n, "identity" with the identity
    std::string target;
    std::size_t points = 20;       ///< denjoy: base points per letter
    std::size_t pairs = 500;       ///< denjoy: sampled pairs
    std::size_t tau_points = 9;    ///< diagnostics: interior grid for tau
    bool sums = false;             ///< diagnostics: also the nested sums
    bool record_runtime = false;   ///< write wall-clock times into the CSVs
    long double tower_tol = 1e-12L;
    long double increment_tol = 1e-15L;

    /// Scalar used for the run: "rational", "long double" or "mpfr".
    std::string scalar() const;
    int digits() const;
};

/// Field-level validation; throws ConfigError naming the offending field.
ExperimentConfig parse_config(const json& j);

/// Reads a config file as JSON; syntax errors report line and column.
json read_config(const std::filesystem::path& path);

ExperimentConfig load_config(const std::filesystem::path& path);

json to_json(const ExperimentConfig& c);

}  // namespace renorm::cli
