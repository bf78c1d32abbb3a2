#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "forkrace/chain_tree.hpp"
#include "forkrace/mining_engine.hpp"
#include "forkrace/simulation.hpp"

namespace forkrace::testing {

// "H D1 D1 D2" -> event list.
inline std::vector<PoolId> script(const std::string& text) {
    std::vector<PoolId> out;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) out.push_back(tok == "H" ? kHonest : PoolId(std::stoi(tok.substr(1))));
    return out;
}

inline SimConfig uniform_config(int m) {
    return SimConfig::from_alphas(std::vector<double>(static_cast<std::size_t>(m) + 1, 1.0 / (m + 1)));
}

struct ChainSpec {
    bool forked = false;
    int k = 0;
    int l = 0;
};

// Builds a tree with honest length v and the given dishonest chains. Forks
// are placed after all honest blocks exist, so any k <= v is accepted.
inline RoundTree make_tree(int v, const std::vector<ChainSpec>& dishonest) {
    RoundTree t(static_cast<int>(dishonest.size()));
    for (int i = 0; i < v; ++i) t.append(kHonest);
    for (std::size_t i = 0; i < dishonest.size(); ++i) {
        const PoolId p(static_cast<int>(i) + 1);
        if (!dishonest[i].forked) continue;
        t.fork(p, dishonest[i].k);
        for (int b = 0; b < dishonest[i].l; ++b) t.append(p);
    }
    return t;
}

// A closed round assembled by hand (not necessarily reachable by play).
inline RoundOutcome make_outcome(PoolId winner, int v, const std::vector<ChainSpec>& dishonest, int phi = 0,
                                 PoolId firstOwner = kHonest) {
    RoundOutcome o;
    o.tree = make_tree(v, dishonest);
    o.winner = winner;
    o.v = v;
    o.perPool.push_back({true, 0, v});
    for (const auto& c : dishonest) o.perPool.push_back({c.forked, c.k, c.l});
    if (!winner.honest()) {
        o.phi = phi;
        o.reserved = o.stats(winner).l - phi;
    }
    const SortedLengths s = sorted_lengths(o.tree);
    o.omega1 = s.omega1;
    o.omega2 = s.omega2;
    o.peggedBlocks = select_main_chain(o.tree, winner, o.phi);
    o.duration = 1.0;
    o.firstBlockOwner = firstOwner;
    return o;
}

inline std::vector<ReplayRound> replay(const std::string& events, const SimConfig& config,
                                       std::optional<Carryover> carry = std::nullopt) {
    return replay_script({script(events), carry}, config);
}

}  // namespace forkrace::testing
