#pragma once

// Run configuration shared by the command-line subcommands.
//
// Files are flat `key = value` lines; `#` starts a comment. The same keys are
// accepted as command-line flags, which override the file.

#include "imave/estimators.hpp"
#include "imave/simgen.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace imave {

enum class Subcommand { fit, generate, replicate, select_dim };

[[nodiscard]] std::string_view to_string(Subcommand s) noexcept;
[[nodiscard]] Subcommand parse_subcommand(std::string_view name);

struct RunConfig {
    Subcommand subcommand = Subcommand::fit;
    std::optional<ModelId> model;
    std::optional<std::string> dataset;
    Method method{Metric::log_euclidean, EstimatorKind::imave};
    std::optional<Eigen::Index> d;  // empty means "auto" (dimension by cross-validation)

    Eigen::Index p = 10;
    Eigen::Index n = 200;
    double sigma = 0.2;
    std::uint64_t seed = 20240101;
    int replications = 100;

    FitOptions fit;
    int threads = 1;

    std::string output;  // basis, dataset, results or CV table depending on the subcommand
    std::string report;  // JSON run report
    std::string summary; // replicate: summary CSV

    bool operator==(const RunConfig&) const = default;
};

// One raw `key = value` setting with the line it came from (0 for flags).
struct ConfigEntry {
    std::string value;
    std::size_t line = 0;
};
using ConfigEntries = std::map<std::string, ConfigEntry>;

// All recognized keys, in the order write_config emits them.
[[nodiscard]] const std::vector<std::string>& config_keys();

// Reads key = value lines. Throws ConfigError on syntax errors, unknown keys
// and keys given twice.
[[nodiscard]] ConfigEntries read_config_entries(std::istream& in);

// Validates the entries and fills defaults. Model-dependent defaults (sigma,
// kernel, bandwidth policy, standardization, d) follow the simulation study
// when a model is given; select-dim defaults to iOPG fits. Errors name the key
// and its line.
[[nodiscard]] RunConfig build_config(const ConfigEntries& entries);

[[nodiscard]] RunConfig parse_config(std::istream& in);
[[nodiscard]] RunConfig parse_config_file(const std::string& path);

// Emits every key with its effective value; parse_config reads it back to an equal RunConfig.
void write_config(std::ostream& out, const RunConfig& config);

}  // namespace imave
