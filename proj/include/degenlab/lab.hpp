#pragma once

/// @file lab.hpp
/// @brief Experiment configs, packaged scenarios, the audit runner, and report files.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "degenlab/auditor.hpp"

namespace degenlab {

/// Invalid configuration; the message carries origin:line:column and the key path.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FieldSpec {
    std::string name;
    std::string kind;  ///< constant | degenerate | sinusoid | piecewise | tabulated
    std::vector<double> domain;  ///< [a, b] or [x0, x1, y0, y1]
    double value = 1.0;
    double delta = 0.0;
    double scale = 1.0;
    double mean = 1.0;
    double amplitude = 0.0;
    double frequency = 1.0;
    double phase = 0.0;
    std::vector<double> x_breaks;
    std::vector<double> y_breaks;
    std::vector<double> values;
    int table_nx = 0;
    int table_ny = 1;

    [[nodiscard]] Box box() const;
    [[nodiscard]] CoefficientField build() const;
};

struct SetSpec {
    std::string name;
    std::vector<std::vector<double>> parts;  ///< [a, b] intervals or [x0, x1, y0, y1] boxes

    [[nodiscard]] Region region() const;
};

struct AuditSpec {
    std::string kind;
    std::vector<std::string> sets;
    std::vector<double> times;  ///< empty: the experiment default
    std::string mode = "d";
    int samples = 5;
    double amplitude = 1.0;
    double lambda = 1.0;
    std::vector<double> eps;
    std::vector<int> sizes;
    std::string observable;
    double t = 0.1;
    std::optional<double> expect;
    double tolerance_cells = 2.0;
    std::optional<double> at_most_cells;
    std::optional<bool> finite;
    std::optional<double> target;
    std::optional<double> min_order;
    std::optional<double> below;
    std::optional<double> max_relative_change;
};

struct ExperimentConfig {
    std::string scenario;
    std::string description;
    std::uint64_t seed = 0;
    int jobs = 0;  ///< 0: hardware parallelism
    std::string output;
    std::vector<FieldSpec> fields;
    std::vector<int> sizes;
    std::optional<int> ny;
    BoundaryCondition boundary = BoundaryCondition::neumann;
    std::vector<double> eps{0.0};
    std::vector<SetSpec> sets;
    std::vector<double> times;
    double wave_constant = 1e-5;
    std::vector<AuditSpec> audits;

    [[nodiscard]] int dim() const;
    [[nodiscard]] const SetSpec& set(const std::string& name) const;
};

/// Parses YAML (or JSON) text; `origin` names the source in diagnostics.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

struct Scenario {
    std::string name;
    std::string summary;
    std::string yaml;
};

const std::vector<Scenario>& packaged_scenarios();
const Scenario* find_scenario(const std::string& name);

struct RunOptions {
    std::optional<int> grid_override;
    std::optional<int> jobs;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output;
};

/// Applies command-line overrides to a config.
ExperimentConfig apply_overrides(ExperimentConfig config, const RunOptions& options);

struct RunReport {
    /// Deterministic report body (config echo, records, studies, distances).
    std::string json;
    std::vector<AuditRecord> records;
    std::vector<RefinementStudy> studies;
    /// Non-deterministic metadata (wall clock, per-job durations).
    std::string timing_json;
    int certified_failures = 0;
    int continuum_failures = 0;
};

inline constexpr int kSchemaVersion = 1;

RunReport run_experiment(const ExperimentConfig& config);

/// Writes report.json, records.csv, refinement.csv and timing.json into `dir`.
void write_report(const RunReport& report, const std::filesystem::path& dir);

/// 0 all pass, 2 certified failure, 3 continuum failure.
int exit_code(const RunReport& report);

/// JSON echo of a config; parse_config accepts it back.
std::string config_echo(const ExperimentConfig& config);

}  // namespace degenlab
