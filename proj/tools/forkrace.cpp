// forkrace: batch front end for the mining-competition simulator.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "forkrace/error.hpp"
#include "forkrace/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo simulator for PoW mining competition between one honest and m dishonest pools"};
    std::optional<std::string> configPath;
    forkrace::ConfigOverrides ov;
    bool emitRounds = false;

    app.add_option("--config", configPath, "JSON experiment config");
    app.add_option("--mode", ov.mode, "single | sweep | threshold");
    app.add_option("--alphas", ov.alphas, "mining powers, honest pool first")->delimiter(',');
    app.add_option("--grid", ov.grid, "alpha_H grid values for sweep / threshold")->delimiter(',');
    app.add_option("--rounds", ov.rounds, "rounds per run");
    app.add_option("--replications", ov.replications, "independent runs per grid point");
    app.add_option("--seed", ov.seed, "master seed");
    app.add_option("--out", ov.outDir, "output directory");
    app.add_option("--workers", ov.workers, "worker threads (0 = all cores; SIM_WORKERS overrides)");
    app.add_flag("--emit-rounds", emitRounds, "also write rounds.csv (capped)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? forkrace::kExitOk : forkrace::kExitConfigError;
    }
    if (emitRounds) ov.emitRounds = true;

    forkrace::ExperimentSpec spec;
    try {
        spec = forkrace::parse_config(configPath, ov);
    } catch (const forkrace::Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return forkrace::kExitConfigError;
    }

    try {
        const auto result = forkrace::run_experiment(spec);
        std::cerr << "wrote " << spec.outDir << "/summary.json and gridpoint.csv in " << result.wallClockSeconds
                  << " s\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return forkrace::kExitRuntimeError;
    }
    return forkrace::kExitOk;
}
