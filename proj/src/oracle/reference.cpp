#include <algorithm>
#include <numeric>

#include "forkrace/oracle.hpp"

namespace forkrace::oracle {

RefRules RefRules::from(const SimConfig& config) {
    RefRules r;
    r.m = config.m();
    r.leadThreshold = config.leadThreshold;
    r.dishonestStopLead = config.dishonestStopLead;
    r.releaseMin = config.releasePolicy == ReleasePolicy::ReleaseMin;
    return r;
}

namespace {

RefFraction fraction(std::int64_t num, std::int64_t den) {
    const std::int64_t g = std::gcd(num, den);
    return g == 0 ? RefFraction{0, 1} : RefFraction{num / g, den / g};
}

struct Played {
    RefRound round;
    std::size_t endPos = 0;  // index of the first event after the round
};

// One round from events[pos..]; nullopt if the events run out first.
std::optional<Played> play_one(const std::vector<int>& events, std::size_t pos, const RefRules& rules,
                               const std::optional<RefCarry>& carry) {
    const int m = rules.m;
    RefRound r;
    r.forked.assign(m + 1, 0);
    r.k.assign(m + 1, 0);
    r.l.assign(m + 1, 0);
    r.firstOwner = -1;
    if (carry) {
        r.forked[carry->owner] = 1;
        r.l[carry->owner] = carry->blocks;
        r.forkOrder.push_back(carry->owner);
        r.firstOwner = carry->owner;
    }

    int omega2 = 0;
    bool done = false;
    while (!done && pos < events.size()) {
        const int p = events[pos++];
        if (r.firstOwner < 0) r.firstOwner = p;
        if (p == 0) {
            ++r.v;
        } else {
            if (!r.forked[p]) {
                r.forked[p] = 1;
                r.k[p] = r.v;
                r.forkOrder.push_back(p);
            }
            ++r.l[p];
        }

        // Leader is the longest chain; ties go to the lower pool index.
        std::vector<int> len(m + 1);
        len[0] = r.v;
        for (int i = 1; i <= m; ++i) len[i] = r.forked[i] ? r.k[i] + r.l[i] : 0;
        int leader = 0;
        for (int i = 1; i <= m; ++i)
            if (len[i] > len[leader]) leader = i;
        omega2 = 0;
        for (int i = 0; i <= m; ++i)
            if (i != leader) omega2 = std::max(omega2, len[i]);
        const int lead = len[leader] - omega2;

        if (leader == 0 && lead >= rules.leadThreshold) done = true;
        if (leader != 0 && lead >= rules.dishonestStopLead) done = true;
        if (done) r.winner = leader;
    }
    if (!done) return std::nullopt;

    r.l[0] = r.v;
    r.forked[0] = 1;
    if (r.winner != 0) {
        const int w = r.winner;
        r.phi = rules.releaseMin ? std::max(1, omega2 + rules.leadThreshold - r.k[w]) : r.l[w];
        r.reserved = r.l[w] - r.phi;
    }
    return Played{r, pos};
}

struct RefBlock {
    int owner;
    int height;
    int ordinal;
};

void settle(RefRound& r, int nephewOwner, int nephewHeight, int roundIndex, int prevUncleCount,
            const RefRules& rules) {
    const int m = rules.m;
    r.settled = true;
    r.nephewOwner = nephewOwner;
    r.nephewHeight = nephewHeight;

    // Orphans that may become uncles: the first block of every losing fork,
    // and when a dishonest pool wins, the first honest block past its fork.
    auto within = [&](int height) {
        const int d = nephewHeight - height;
        return 1 <= d && d <= rules.maxUncleDistance;
    };
    bool honestUncle = false;
    if (r.winner != 0) {
        const int kz = r.k[r.winner];
        if (r.v >= kz + 1 && within(kz + 1)) {
            honestUncle = true;
            r.uncles.push_back({0, kz + 1, nephewHeight - (kz + 1)});
        }
    }
    for (int j = 1; j <= m; ++j) {
        if (j == r.winner || !r.forked[j] || r.l[j] == 0) continue;
        if (!within(r.k[j] + 1)) continue;
        if (honestUncle && r.k[j] >= r.k[r.winner] + 1) continue;
        r.uncles.push_back({j, r.k[j] + 1, nephewHeight - (r.k[j] + 1)});
    }
    std::sort(r.uncles.begin(), r.uncles.end(), [](const RefUncle& a, const RefUncle& b) {
        return a.height != b.height ? a.height < b.height : a.owner < b.owner;
    });

    // Observed blocks; the winner's reserved blocks are not part of this round.
    std::vector<RefBlock> observed;
    for (int h = 1; h <= r.v; ++h) observed.push_back({0, h, h});
    for (int j = 1; j <= m; ++j) {
        const int shown = j == r.winner ? r.phi : r.l[j];
        for (int o = 1; o <= shown; ++o) observed.push_back({j, r.k[j] + o, o});
    }
    auto pegged = [&](const RefBlock& b) {
        if (r.winner == 0) return b.owner == 0;
        if (b.owner == 0) return b.height <= r.k[r.winner];
        return b.owner == r.winner;
    };

    r.rewards.assign(m + 1, RefReward{});
    int honestPegged = 0;
    int uncleBlocks = 0;
    for (const RefBlock& b : observed) {
        if (pegged(b)) {
            ++r.regular;
            if (b.owner == 0) ++honestPegged;
            r.rewards[b.owner].regular += 32;
            continue;
        }
        bool isUncle = false;
        for (const RefUncle& u : r.uncles)
            if (u.owner == b.owner && u.height == b.height && (b.owner == 0 || b.ordinal == 1)) isUncle = true;
        if (isUncle) {
            ++uncleBlocks;
        } else {
            ++r.stale;
        }
    }
    for (const RefUncle& u : r.uncles) r.rewards[u.owner].uncle += 4 * (8 - u.distance);
    if (roundIndex > 1) r.rewards[r.firstOwner].nephew += prevUncleCount;

    r.observed = static_cast<int>(observed.size());
    r.cQ = fraction(honestPegged, r.regular);
    r.rM = fraction(r.regular, r.observed);
    r.rO = fraction(r.observed - r.regular, r.observed);
    r.rU = fraction(uncleBlocks, r.observed);
    r.rS = fraction(r.stale, r.observed);
}

}  // namespace

std::vector<RefRound> reference_play(const std::vector<int>& events, const RefRules& rules,
                                     std::optional<RefCarry> carry) {
    std::vector<Played> played;
    std::size_t pos = 0;
    for (;;) {
        auto p = play_one(events, pos, rules, carry);
        if (!p) break;
        pos = p->endPos;
        carry.reset();
        if (p->round.reserved > 0) carry = RefCarry{p->round.winner, p->round.reserved};
        played.push_back(std::move(*p));
    }

    std::vector<RefRound> out;
    int prevUncleCount = 0;
    for (std::size_t i = 0; i < played.size(); ++i) {
        RefRound& r = played[i].round;
        const std::size_t next = played[i].endPos;
        if (r.reserved > 0) {
            settle(r, r.winner, r.k[r.winner] + r.phi + 1, static_cast<int>(i) + 1, prevUncleCount, rules);
        } else if (next < events.size()) {
            const int pegged = r.winner == 0 ? r.v : r.k[r.winner] + r.phi;
            settle(r, events[next], pegged + 1, static_cast<int>(i) + 1, prevUncleCount, rules);
        }
        prevUncleCount = static_cast<int>(r.uncles.size());
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace forkrace::oracle
