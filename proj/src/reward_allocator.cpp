#include "forkrace/reward_allocator.hpp"

#include "forkrace/error.hpp"

namespace forkrace {

Rational RewardVector::total_regular() const {
    Rational sum;
    for (const auto& r : perPool) sum += r.regular;
    return sum;
}

Rational RewardVector::total() const {
    Rational sum;
    for (const auto& r : perPool) sum += r.total();
    return sum;
}

std::vector<std::pair<PoolId, Rational>> settle_uncle_rewards(const Classification& pendingRound) {
    if (!pendingRound.nephew) throw Error(Errc::NephewUnavailable, "round has no nephew yet");
    std::vector<std::pair<PoolId, Rational>> out;
    out.reserve(pendingRound.uncles.size());
    for (const auto& u : pendingRound.uncles) out.emplace_back(u.owner, u.reward);
    return out;
}

RewardVector allocate(const RoundOutcome& outcome, const Classification& classification, int prevUncleCount) {
    RewardVector rv;
    rv.roundIndex = classification.roundIndex;
    rv.perPool.resize(outcome.perPool.size());

    if (outcome.winner.honest()) {
        rv.perPool[0].regular = Rational(outcome.v);
    } else {
        rv.perPool[outcome.winner.slot()].regular = Rational(outcome.phi);
        rv.perPool[0].regular = Rational(outcome.stats(outcome.winner).k);
    }

    for (const auto& [owner, reward] : settle_uncle_rewards(classification)) rv.perPool[owner.slot()].uncle += reward;

    rv.hasNephew = classification.roundIndex > 1;
    rv.nephewHolder = outcome.firstBlockOwner;
    rv.nephewUncleCount = prevUncleCount;
    if (prevUncleCount > 0) rv.perPool[outcome.firstBlockOwner.slot()].nephew += nephew_reward(prevUncleCount);
    return rv;
}

}  // namespace forkrace
