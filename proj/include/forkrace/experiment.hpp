#pragma once

// Batch experiments: a JSON config (or flags) selects single / sweep /
// threshold mode; each (grid point, replication) pair is an independent run
// seeded by child_seed(master, grid index, replication index).
//
// Config document (every key optional except "alphas"):
//   {
//     "mode": "single" | "sweep" | "threshold",
//     "alphas": [alphaH, alpha1, ..., alpham],
//     "gamma": 10, "meanBlockTime": 15,
//     "leadThreshold": 2, "dishonestStopLead": 2,
//     "releasePolicy": "all" | "min",
//     "rounds": 20000, "replications": 1, "seed": 1,
//     "out": "out", "workers": 0,
//     "emitRounds": false, "roundsCap": 100000,
//     "grid": [0.55, 0.60, ...]  or  {"from": 0.55, "to": 0.80, "step": 0.05}
//   }
// In sweep and threshold mode "alphas" is a template: alpha_H takes each grid
// value and alpha_1 = 1 - alpha_H - sum_{j>=2} alpha_j.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "forkrace/mining_engine.hpp"

namespace forkrace {

enum class ExperimentMode { Single, Sweep, Threshold };

std::string to_string(ExperimentMode mode);

struct ExperimentSpec {
    ExperimentMode mode = ExperimentMode::Single;
    SimConfig base;
    std::vector<double> grid;  // alpha_H values; single mode uses base alphas
    std::int64_t rounds = 20000;
    int replications = 1;
    std::uint64_t masterSeed = 1;
    std::string outDir = "out";
    int workers = 0;  // 0 = available parallelism
    bool emitRounds = false;
    std::int64_t roundsCap = 100000;

    /// Configurations simulated, one per grid point (exactly one in single mode).
    std::vector<SimConfig> grid_configs() const;
    int effective_workers() const;
};

/// Command-line values that take precedence over the config file.
struct ConfigOverrides {
    std::optional<std::string> mode;
    std::optional<std::vector<double>> alphas;
    std::optional<std::vector<double>> grid;
    std::optional<std::int64_t> rounds;
    std::optional<int> replications;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> outDir;
    std::optional<int> workers;
    std::optional<bool> emitRounds;
};

/// Parses and validates. Throws Error(ConfigError) naming the offending
/// field, or Error(IoError) if the file cannot be read. SIM_WORKERS in the
/// environment overrides both the file and the flags.
ExperimentSpec parse_config(const std::optional<std::string>& path, const ConfigOverrides& overrides = {});
ExperimentSpec parse_config_text(const std::string& text, const ConfigOverrides& overrides = {});

struct ExperimentResult {
    std::string summaryJson;
    std::string gridpointCsv;
    std::string roundsCsv;  // empty unless emitRounds
    double wallClockSeconds = 0.0;
};

/// Runs every job and renders the outputs without touching the filesystem.
ExperimentResult execute(const ExperimentSpec& spec);

/// execute() plus writing summary.json, gridpoint.csv and rounds.csv into
/// spec.outDir. Throws Error(IoError) if the directory is unwritable.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Fixed column order of gridpoint.csv for m dishonest pools.
std::vector<std::string> gridpoint_columns(int m, bool threshold);

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitRuntimeError = 3;

}  // namespace forkrace
