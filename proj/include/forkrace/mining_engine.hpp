#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "forkrace/chain_tree.hpp"
#include "forkrace/rng.hpp"

namespace forkrace {

enum class ReleasePolicy {
    ReleaseAll,  // phi = l_winner
    ReleaseMin,  // phi = max(1, omega2 + leadThreshold - k_winner); rest reserved
};

struct PoolSpec {
    PoolId id;
    double alpha = 0.0;  // share of the total mining power
};

struct SimConfig {
    std::vector<PoolSpec> pools;  // pools[0] is the honest pool
    double gamma = 10.0;          // communication rate of the P2P network
    double meanBlockTime = 15.0;  // seconds
    int leadThreshold = 2;
    // A dishonest leader ends the round once its lead reaches this value.
    // Equal to leadThreshold means it stops as soon as it is eligible.
    int dishonestStopLead = 2;
    ReleasePolicy releasePolicy = ReleasePolicy::ReleaseAll;
    std::uint64_t seed = 0;
    double alphaSumTolerance = 1e-9;

    static SimConfig from_alphas(const std::vector<double>& alphas, double gamma = 10.0);

    int m() const { return static_cast<int>(pools.size()) - 1; }
    std::vector<double> alphas() const;
    /// Throws Error(InvalidConfig) describing the first offending field.
    void validate() const;
};

struct PoolRoundStats {
    bool forked = false;
    int k = 0;  // fork position
    int l = 0;  // blocks mined this round (carried-in private blocks included)
};

struct RoundOutcome {
    PoolId winner;
    int v = 0;
    // Indexed by pool; entry 0 mirrors the honest chain as {true, 0, v}.
    std::vector<PoolRoundStats> perPool;
    int phi = 0;
    int reserved = 0;
    int omega1 = 0;
    int omega2 = 0;
    double duration = 0.0;
    std::vector<Block> peggedBlocks;
    RoundTree tree{1};
    PoolId firstBlockOwner;  // owner of the round's first block (carried block if any)
    int carriedIn = 0;       // private blocks inherited from the previous round
    int minedBlocks = 0;     // blocks mined during this round

    const PoolRoundStats& stats(PoolId pool) const { return perPool[pool.slot()]; }
    int pegged_length() const { return static_cast<int>(peggedBlocks.size()); }
};

struct Carryover {
    PoolId owner;
    int privateBlocks = 0;
    bool pendingNephew = true;
};

inline constexpr double kNever = std::numeric_limits<double>::infinity();

/// d * (1/alpha + 1/gamma); kNever when alpha == 0.
double interarrival_from_draw(double draw, double alpha, double gamma);

/// Exponential draw with mean meanBlockTime by inverse transform, scaled by
/// the pool's mining power and the communication rate.
double sample_interarrival(SplitMix64& rng, const PoolSpec& pool, const SimConfig& config);

/// Source of block inter-arrival times. The sampled clock drives real
/// simulations; a scripted clock replays a fixed order of events.
class ArrivalClock {
public:
    virtual ~ArrivalClock() = default;
    /// Time until `pool` mines its next block, measured from `now`.
    virtual double next_interarrival(PoolId pool, double now) = 0;
};

class SampledClock final : public ArrivalClock {
public:
    SampledClock(const SimConfig& config, std::uint64_t seed) : config_(&config), rng_(seed) {}
    SampledClock(const SimConfig& config, SplitMix64 rng) : config_(&config), rng_(rng) {}

    double next_interarrival(PoolId pool, double now) override;
    const SplitMix64& rng() const { return rng_; }

private:
    const SimConfig* config_;
    SplitMix64 rng_;
};

/// Replays events in order: the j-th event (0-based) happens at time j + 1.
class ScriptedClock final : public ArrivalClock {
public:
    explicit ScriptedClock(std::vector<PoolId> events) : events_(std::move(events)) {}

    double next_interarrival(PoolId pool, double now) override;
    std::size_t size() const { return events_.size(); }

private:
    std::vector<PoolId> events_;
};

class MiningEngine {
public:
    /// The clock must outlive the engine.
    MiningEngine(SimConfig config, ArrivalClock& clock);

    /// Plays one round. Returns nullopt if the clock runs out of events
    /// before the round terminates (scripted clocks only).
    std::optional<RoundOutcome> try_run_round(const std::optional<Carryover>& carryover);
    RoundOutcome run_round(const std::optional<Carryover>& carryover);

    /// Owner of the next block that would be mined from the current instant,
    /// without playing it. Used to close the last simulated round.
    std::optional<PoolId> draw_first_block_owner();

    double now() const { return now_; }
    const SimConfig& config() const { return config_; }

private:
    SimConfig config_;
    ArrivalClock* clock_;
    double now_ = 0.0;
    std::vector<double> next_;
};

/// One round from a fresh sampled clock seeded by rng.
RoundOutcome run_round(const SimConfig& config, const std::optional<Carryover>& carryover, SplitMix64& rng);

std::optional<Carryover> make_carryover(const RoundOutcome& outcome);

}  // namespace forkrace
