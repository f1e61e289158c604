#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "stpg/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Space-time Petrov-Galerkin heat equation experiments"};
    app.require_subcommand(1);

    std::string run_config;
    std::string out_dir;
    int workers = 1;
    bool quiet = false;
    auto* run = app.add_subcommand("run", "Run a refinement study and write rate tables");
    run->add_option("config", run_config, "Experiment config (JSON)")->required();
    run->add_option("--out", out_dir, "Output directory (overrides $STPG_OUTPUT_DIR and config)");
    run->add_option("--parallel", workers, "Number of levels solved concurrently")
        ->check(CLI::PositiveNumber);
    run->add_flag("--quiet", quiet, "Suppress progress and summary output");

    std::string diag_config;
    std::string diag_out;
    bool diag_quiet = false;
    auto* diagnose = app.add_subcommand("diagnose", "Compute c_B, C_B, c_S and C_CFL per level");
    diagnose->add_option("config", diag_config, "Experiment config (JSON)")->required();
    diagnose->add_option("--out", diag_out, "Output directory");
    diagnose->add_flag("--quiet", diag_quiet, "Suppress progress and summary output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : stpg::kExitConfig;
    }

    stpg::RunOptions options;
    if (run->parsed()) {
        if (!out_dir.empty()) options.output_dir = out_dir;
        options.workers = workers;
        options.quiet = quiet;
        return stpg::run_experiment(run_config, options);
    }
    if (!diag_out.empty()) options.output_dir = diag_out;
    options.quiet = diag_quiet;
    options.diagnostics_only = true;
    return stpg::run_experiment(diag_config, options);
}
