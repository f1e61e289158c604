#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "stpg/analysis.hpp"
#include "stpg/diagnostics.hpp"

namespace stpg {

/// Exit codes of the experiment runner.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitSolver = 3,
    kExitMissingExact = 4,
    kExitOutput = 5,
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A refinement study. Each level n is a mesh with n elements per side; the
/// number of intervals is either listed explicitly or follows k = c * h^gamma.
struct ExperimentConfig {
    std::string name = "experiment";
    std::string problem = "heat1d-smooth";
    double epsilon = 0.1;
    double impulse_time = 0.5;
    int q = 0;
    int p = 2;
    std::vector<int> levels;
    double coupling_c = 1.0;
    double coupling_gamma = 2.0;
    std::vector<int> intervals;
    bool compute_errors = true;
    bool stability = true;
    bool diagnostics = false;
    bool write_solutions = false;
    std::uint64_t seed = 20240101;
    std::string output_dir = "out";
    int time_quadrature_points = 0;
    int max_cs_intervals = 64;
    double rate_tolerance = 0.3;
};

/// Throws ConfigError on malformed or invalid input.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& config);

/// Number of time intervals for level index `level`.
int intervals_for_level(const ExperimentConfig& config, std::size_t level, double final_time);

struct LevelResult {
    int n = 0;
    int intervals = 0;
    double h = 0.0;
    double k = 0.0;
    int dofs = 0;
    std::optional<ErrorReport> errors;
    std::optional<StabilityReport> stability;
    std::optional<DiagnosticsReport> diagnostics;
    double cfl = 0.0;
    std::string diagnostics_note;
    std::optional<SpaceTimeSolution> solution;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<LevelResult> levels;
    std::optional<double> rate_u1;
    std::optional<double> rate_u2;
    std::vector<double> pairwise_u1;
    std::vector<double> pairwise_u2;
};

/// Solves one level with the interval-decomposed scheme.
LevelResult run_level(const ExperimentConfig& config, const ProblemSpec& problem, std::size_t level,
                      bool keep_solution = false);

/// Runs every level (levels in parallel when workers > 1) and fits rates.
ExperimentResult run_levels(const ExperimentConfig& config, int workers = 1, bool quiet = true);

/// Dense diagnostics only, one report per level.
ExperimentResult run_diagnostics(const ExperimentConfig& config, bool quiet = true);

nlohmann::json summary_json(const ExperimentResult& result);
std::string rates_csv(const ExperimentResult& result);
std::string loglog_csv(const ExperimentResult& result);

/// Writes rates.csv, loglog.csv and summary.json (and diagnostics.json,
/// solution_<n>.json when requested) into `dir`. Throws OutputError.
void emit_report(const ExperimentResult& result, const std::string& dir);

struct RunOptions {
    std::optional<std::string> output_dir;
    int workers = 1;
    bool quiet = false;
    bool diagnostics_only = false;
};

/// Output directory precedence: --out, then $STPG_OUTPUT_DIR, then the config.
std::string resolve_output_dir(const ExperimentConfig& config, const RunOptions& options);

/// Full pipeline with exit-code mapping.
int run_experiment(const std::string& config_path, const RunOptions& options);

}  // namespace stpg
