#pragma once

#include <utility>
#include <vector>

#include "forkrace/mining_engine.hpp"
#include "forkrace/rational.hpp"
#include "forkrace/uncle_classifier.hpp"

namespace forkrace {

struct PoolReward {
    Rational regular;
    Rational uncle;
    Rational nephew;

    Rational total() const { return regular + uncle + nephew; }
};

struct RewardVector {
    int roundIndex = 0;
    std::vector<PoolReward> perPool;  // indexed by pool
    // The round's first block is the previous round's nephew; absent in round 1.
    bool hasNephew = false;
    PoolId nephewHolder;
    int nephewUncleCount = 0;

    const PoolReward& of(PoolId pool) const { return perPool[pool.slot()]; }
    Rational total_regular() const;
    Rational total() const;
};

/// Rewards booked to one closed round.
///
/// Regular rewards go to whoever mined the pegged blocks (the honest pool
/// keeps the k-block prefix when a dishonest pool wins). Uncle rewards of this
/// round's orphans are booked here too. The nephew reference reward booked
/// here belongs to the previous round's nephew, which is this round's first
/// block, and is worth prevUncleCount / 32. Rounds are numbered from 1; round
/// 1 has no preceding nephew.
RewardVector allocate(const RoundOutcome& outcome, const Classification& classification, int prevUncleCount);

/// Uncle payments of a round whose nephew is known.
std::vector<std::pair<PoolId, Rational>> settle_uncle_rewards(const Classification& pendingRound);

}  // namespace forkrace
