#pragma once

// Two-stage block classification. Once a round closes, its nephew is either
// the first reserved block of the winner or the first block of the next
// round; the nephew then decides which orphans of the closed round are uncles.

#include <optional>
#include <vector>

#include "forkrace/chain_tree.hpp"
#include "forkrace/mining_engine.hpp"
#include "forkrace/rational.hpp"

namespace forkrace {

inline constexpr int kMaxUncleDistance = 6;

struct Nephew {
    PoolId owner;
    int height = 0;  // round-local height of the closed round

    friend constexpr bool operator==(const Nephew&, const Nephew&) = default;
};

struct UncleRef {
    PoolId owner;
    int height = 0;
    int distance = 0;

    friend constexpr bool operator==(const UncleRef&, const UncleRef&) = default;
};

/// Nephew of a closed round. `nextFirstBlockOwner` is only consulted when
/// nothing was reserved; throws NephewUnavailable if it is needed but absent.
Nephew determine_nephew(const RoundOutcome& current, std::optional<PoolId> nextFirstBlockOwner);

/// Uncle candidates within [1, maxDistance] of the nephew, ordered by height
/// then pool index.
std::vector<UncleRef> find_uncles(const RoundOutcome& current, int nephewHeight,
                                  int maxDistance = kMaxUncleDistance);

/// (8 - distance) / 8 for distance in 1..6, NotAnUncle otherwise.
Rational uncle_reward(int distance);

/// N_U / 32.
Rational nephew_reward(int uncleCount);

struct BlockClass {
    enum class Kind { Regular, Uncle, Stale };

    Kind kind = Kind::Regular;
    int distance = 0;  // Uncle only

    bool orphan() const { return kind != Kind::Regular; }
    friend constexpr bool operator==(const BlockClass&, const BlockClass&) = default;
};

struct LabeledBlock {
    Block block;
    BlockClass label;
};

struct UnclePayment {
    PoolId owner;
    int height = 0;
    int distance = 0;
    Rational reward;
};

struct Classification {
    int roundIndex = 0;
    int regularCount = 0;
    int orphanCount = 0;
    int staleCount = 0;
    std::vector<UnclePayment> uncles;
    std::optional<Nephew> nephew;
    std::vector<LabeledBlock> labels;  // every observed block of the round

    int uncle_count() const { return static_cast<int>(uncles.size()); }
    int observed_count() const { return regularCount + orphanCount; }
};

/// Labels every observed block: pegged blocks are Regular, the given uncles
/// are Uncle(d) and the remaining orphans are Stale. Reserved blocks are not
/// observed in the round that reserves them.
Classification classify_round(const RoundOutcome& current, const Nephew& nephew, const std::vector<UncleRef>& uncles,
                              int roundIndex = 0);

struct RoundRatios {
    Rational chainQuality;     // c_Q
    Rational mainChainRatio;   // r_M
    Rational orphanRatio;      // r_O
    Rational uncleRatio;       // r_U
    Rational staleRatio;       // r_S
};

RoundRatios round_ratios(const RoundOutcome& current, const Classification& classification);

}  // namespace forkrace
