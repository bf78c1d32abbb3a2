#pragma once

// Round-by-round pipeline: engine -> nephew/uncles -> classification ->
// ratios -> rewards -> estimator bank. A round is settled once the first
// block after it is known (next round's first block or its own reserve).

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "forkrace/metrics.hpp"
#include "forkrace/mining_engine.hpp"
#include "forkrace/reward_allocator.hpp"
#include "forkrace/uncle_classifier.hpp"

namespace forkrace {

struct SettledRound {
    int index = 0;  // 1-based
    RoundOutcome outcome;
    Nephew nephew;
    Classification classification;
    RoundRatios ratios;
    RewardVector rewards;
};

struct PipelineOptions {
    int maxUncleDistance = kMaxUncleDistance;
};

class RoundSettler {
public:
    explicit RoundSettler(int m, PipelineOptions options = {}) : bank_(m), options_(options) {}

    /// Accepts the next closed round; settles the previously pending round
    /// using this round's first block. Returns the settled round, if any.
    std::optional<SettledRound> push(RoundOutcome outcome);

    /// Settles the pending round with an explicitly drawn follow-up block
    /// (ignored if the round reserved blocks). Returns nullopt when there is
    /// no pending round or its nephew cannot be determined.
    std::optional<SettledRound> close(std::optional<PoolId> nextFirstBlockOwner);

    const EstimatorBank& bank() const { return bank_; }
    EstimatorBank take_bank() { return std::move(bank_); }
    const std::optional<RoundOutcome>& pending() const { return pending_; }

private:
    SettledRound settle(RoundOutcome outcome, std::optional<PoolId> nextFirstBlockOwner);

    EstimatorBank bank_;
    PipelineOptions options_;
    std::optional<RoundOutcome> pending_;
    int prevUncleCount_ = 0;
    int settledCount_ = 0;
};

using RoundObserver = std::function<void(const SettledRound&)>;

/// Simulates `rounds` consecutive rounds from one seed and returns the bank.
/// One extra first-block draw closes the final round; it earns nothing.
EstimatorBank simulate(const SimConfig& config, std::int64_t rounds, std::uint64_t seed,
                       const RoundObserver& observer = {}, PipelineOptions options = {});

struct ReplayRound {
    RoundOutcome outcome;
    std::optional<SettledRound> settled;  // nullopt when no block follows the round
};

struct EventScript {
    std::vector<PoolId> events;
    std::optional<Carryover> carryover;  // private blocks held at the start
};

/// Replays an event order through the same engine and pipeline used by
/// simulate(). Throws Incomplete if no round closes.
std::vector<ReplayRound> replay_script(const EventScript& script, const SimConfig& config,
                                       PipelineOptions options = {});

/// Mean win probabilities p_H and p_1 at every grid value of alpha_H with
/// alpha_1 = 1 - alpha_H - sum_{j>=2} alpha_j, then the crossing p_1 = p_H.
ThresholdEstimate find_power_threshold(const SimConfig& base, const std::vector<double>& alphaGrid, int replications,
                                       std::int64_t roundsPerRun, std::uint64_t masterSeed, int workers = 1);

/// Template config with alpha_H set and alpha_1 absorbing the remainder.
/// Throws InvalidConfig when alpha_1 would be negative.
SimConfig with_honest_alpha(const SimConfig& base, double alphaH);

/// Runs fn(0..count-1) over `workers` threads; each index runs exactly once.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace forkrace
