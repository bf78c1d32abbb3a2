#pragma once

// Ground truth for small scripted scenarios. The reference player below is a
// plain transcription of the round rules over integer vectors; it shares no
// code with the engine, classifier or allocator it is compared against.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "forkrace/mining_engine.hpp"
#include "forkrace/simulation.hpp"

namespace forkrace::oracle {

struct RefRules {
    int m = 2;
    int leadThreshold = 2;
    int dishonestStopLead = 2;
    bool releaseMin = false;
    int maxUncleDistance = 6;

    static RefRules from(const SimConfig& config);
};

struct RefUncle {
    int owner = 0;
    int height = 0;
    int distance = 0;
};

// Rewards are integers in units of 1/32 block.
struct RefReward {
    std::int64_t regular = 0;
    std::int64_t uncle = 0;
    std::int64_t nephew = 0;
};

struct RefFraction {
    std::int64_t num = 0;
    std::int64_t den = 1;
};

struct RefRound {
    int winner = 0;
    int v = 0;
    std::vector<int> forked, k, l;  // indexed by pool, entry 0 = honest (k 0, l v)
    std::vector<int> forkOrder;     // dishonest pools in the order they forked
    int phi = 0;
    int reserved = 0;
    int firstOwner = 0;

    bool settled = false;
    int nephewOwner = 0;
    int nephewHeight = 0;
    std::vector<RefUncle> uncles;  // by height, then owner
    int observed = 0;
    int regular = 0;
    int stale = 0;
    RefFraction cQ, rM, rO, rU, rS;
    std::vector<RefReward> rewards;
};

struct RefCarry {
    int owner = 0;
    int blocks = 0;
};

/// Plays the whole event list; the returned rounds are those that closed.
/// A closed round is settled when its nephew is known.
std::vector<RefRound> reference_play(const std::vector<int>& events, const RefRules& rules,
                                     std::optional<RefCarry> carry = std::nullopt);

/// Differences between one library round and the reference, as text.
std::vector<std::string> compare(const ReplayRound& got, const RefRound& want);

/// Invariants that must hold on any settled library round, independent of
/// the reference. `prevUncleCount` is N_U of the round before.
std::vector<std::string> check_invariants(const SettledRound& round, int prevUncleCount, int leadThreshold = 2);

struct Violation {
    std::string script;
    int round = 0;  // 1-based; 0 for script-level failures
    std::string what;
};

struct Report {
    std::int64_t scriptsChecked = 0;
    std::int64_t scriptsIncomplete = 0;  // no round closed; nothing to check
    std::int64_t roundsChecked = 0;
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    std::string to_json() const;
};

struct CheckOptions {
    std::optional<Carryover> carryover;
    // Pipeline settings of the implementation under test. The reference always
    // uses the rules from the config; changing these seeds a mutation.
    PipelineOptions pipeline;
    std::size_t maxViolations = 100;
};

/// Replays `events` through the library and the reference and records every
/// disagreement and invariant breach in `report`.
void check_script(const std::vector<PoolId>& events, const SimConfig& config, const CheckOptions& options,
                  Report& report);

/// Every sequence of exactly maxEvents events over the m+1 pools. Shorter
/// sequences are prefixes of these, and each round closed before the last
/// event is settled by the event that follows it.
Report enumerate_and_check(int maxEvents, const SimConfig& config, const CheckOptions& options = {});

std::string script_to_string(const std::vector<PoolId>& events);

}  // namespace forkrace::oracle
