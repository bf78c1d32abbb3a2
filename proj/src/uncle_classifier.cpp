#include "forkrace/uncle_classifier.hpp"

#include <algorithm>
#include <string>

#include "forkrace/error.hpp"

namespace forkrace {

Nephew determine_nephew(const RoundOutcome& current, std::optional<PoolId> nextFirstBlockOwner) {
    if (current.reserved >= 1) {
        const int k = current.stats(current.winner).k;
        return {current.winner, k + current.phi + 1};
    }
    if (!nextFirstBlockOwner)
        throw Error(Errc::NephewUnavailable, "round closed without reserve and no next first block is known");
    return {*nextFirstBlockOwner, current.pegged_length() + 1};
}

std::vector<UncleRef> find_uncles(const RoundOutcome& current, int nephewHeight, int maxDistance) {
    std::vector<UncleRef> out;
    auto qualifies = [&](int height) {
        const int d = nephewHeight - height;
        return d >= 1 && d <= maxDistance;
    };
    const int m = static_cast<int>(current.perPool.size()) - 1;

    if (current.winner.honest()) {
        for (int i = 1; i <= m; ++i) {
            const PoolRoundStats& s = current.perPool[static_cast<std::size_t>(i)];
            if (s.forked && s.l >= 1 && qualifies(s.k + 1)) out.push_back({PoolId(i), s.k + 1, nephewHeight - s.k - 1});
        }
    } else {
        const int kWin = current.stats(current.winner).k;
        const bool honestUncle = current.v > kWin && qualifies(kWin + 1);
        if (honestUncle) out.push_back({kHonest, kWin + 1, nephewHeight - kWin - 1});
        for (int j = 1; j <= m; ++j) {
            if (PoolId(j) == current.winner) continue;
            const PoolRoundStats& s = current.perPool[static_cast<std::size_t>(j)];
            if (!s.forked || s.l < 1 || !qualifies(s.k + 1)) continue;
            // A fork hanging off an orphaned honest block loses out to H_{k+1}.
            if (honestUncle && s.k >= kWin + 1) continue;
            out.push_back({PoolId(j), s.k + 1, nephewHeight - s.k - 1});
        }
    }
    std::sort(out.begin(), out.end(), [](const UncleRef& a, const UncleRef& b) {
        return a.height != b.height ? a.height < b.height : a.owner < b.owner;
    });
    return out;
}

Rational uncle_reward(int distance) {
    if (distance < 1 || distance > kMaxUncleDistance)
        throw Error(Errc::NotAnUncle, "distance " + std::to_string(distance) + " outside 1..6");
    return {8 - distance, 8};
}

Rational nephew_reward(int uncleCount) { return {uncleCount, 32}; }

Classification classify_round(const RoundOutcome& current, const Nephew& nephew, const std::vector<UncleRef>& uncles,
                              int roundIndex) {
    Classification c;
    c.roundIndex = roundIndex;
    c.nephew = nephew;

    auto is_pegged = [&](const Block& b) {
        return std::find(current.peggedBlocks.begin(), current.peggedBlocks.end(), b) != current.peggedBlocks.end();
    };
    auto uncle_of = [&](const Block& b) -> const UncleRef* {
        if (b.ordinal != 1 && !b.owner.honest()) return nullptr;
        for (const auto& u : uncles)
            if (u.owner == b.owner && u.height == b.height) return &u;
        return nullptr;
    };

    for (const SubChain& chain : current.tree.chains()) {
        int observed = chain.length();
        if (chain.owner == current.winner && !chain.owner.honest()) observed = current.phi;
        for (int b = 0; b < observed; ++b) {
            const Block& block = chain.blocks[static_cast<std::size_t>(b)];
            BlockClass label;
            if (is_pegged(block)) {
                label.kind = BlockClass::Kind::Regular;
                ++c.regularCount;
            } else if (const UncleRef* u = uncle_of(block)) {
                label = {BlockClass::Kind::Uncle, u->distance};
                ++c.orphanCount;
                c.uncles.push_back({u->owner, u->height, u->distance, uncle_reward(u->distance)});
            } else {
                label.kind = BlockClass::Kind::Stale;
                ++c.orphanCount;
                ++c.staleCount;
            }
            c.labels.push_back({block, label});
        }
    }
    std::sort(c.uncles.begin(), c.uncles.end(), [](const UnclePayment& a, const UnclePayment& b) {
        return a.height != b.height ? a.height < b.height : a.owner < b.owner;
    });
    return c;
}

RoundRatios round_ratios(const RoundOutcome& current, const Classification& classification) {
    const int m = static_cast<int>(current.perPool.size()) - 1;
    const int nu = classification.uncle_count();
    RoundRatios r;
    if (current.winner.honest()) {
        int lsum = 0;
        for (int i = 1; i <= m; ++i) lsum += current.perPool[static_cast<std::size_t>(i)].l;
        const int denom = current.v + lsum;
        r.chainQuality = Rational(1);
        r.mainChainRatio = Rational(current.v, denom);
        r.orphanRatio = Rational(lsum, denom);
        r.uncleRatio = Rational(nu, denom);
    } else {
        const PoolRoundStats& w = current.stats(current.winner);
        int others = 0;
        for (int j = 1; j <= m; ++j)
            if (PoolId(j) != current.winner) others += current.perPool[static_cast<std::size_t>(j)].l;
        const int denom = current.v + current.phi + others;
        r.chainQuality = Rational(w.k, w.k + current.phi);
        r.mainChainRatio = Rational(current.phi + w.k, denom);
        r.orphanRatio = Rational((current.v - w.k) + others, denom);
        r.uncleRatio = Rational(nu, denom);
    }
    r.staleRatio = r.orphanRatio - r.uncleRatio;
    return r;
}

}  // namespace forkrace
