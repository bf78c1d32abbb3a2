#include "forkrace/chain_tree.hpp"

#include <algorithm>
#include <string>

#include "forkrace/error.hpp"

namespace forkrace {

int SubChain::generalized_length() const {
    if (owner.honest()) return length();
    return forked ? forkPosition + length() : 0;
}

RoundTree::RoundTree(int m) {
    if (m < 1) throw Error(Errc::InvalidConfig, "a round tree needs at least one dishonest pool");
    chains_.resize(static_cast<std::size_t>(m) + 1);
    for (int i = 0; i <= m; ++i) chains_[static_cast<std::size_t>(i)].owner = PoolId(i);
}

const SubChain& RoundTree::chain(PoolId pool) const {
    if (pool.index() < 0 || pool.index() > m())
        throw Error(Errc::InvalidPool, "pool " + std::to_string(pool.index()) + " out of range");
    return chains_[pool.slot()];
}

SubChain& RoundTree::mutable_chain(PoolId pool) {
    return const_cast<SubChain&>(static_cast<const RoundTree&>(*this).chain(pool));
}

PoolId RoundTree::first_forked() const {
    for (const auto& c : chains_)
        if (c.forkOrder == 0) return c.owner;
    return kHonest;
}

void RoundTree::fork(PoolId pool, int honestLengthNow) {
    SubChain& c = mutable_chain(pool);
    if (pool.honest()) throw Error(Errc::InvalidPool, "the honest sub-chain never forks");
    if (c.forked) throw Error(Errc::AlreadyForked, "pool " + std::to_string(pool.index()) + " already forked");
    if (honestLengthNow < 0 || honestLengthNow > honest_length())
        throw Error(Errc::InvalidFork, "fork position " + std::to_string(honestLengthNow) +
                                           " beyond honest length " + std::to_string(honest_length()));
    c.forked = true;
    c.forkPosition = honestLengthNow;
    c.forkOrder = forksSoFar_++;
}

void RoundTree::append(PoolId pool) {
    SubChain& c = mutable_chain(pool);
    if (!pool.honest() && !c.forked)
        throw Error(Errc::NotForked, "pool " + std::to_string(pool.index()) + " has not forked");
    const int ordinal = c.length() + 1;
    c.blocks.push_back(Block{pool, c.forkPosition + ordinal, ordinal});
}

RoundTree fork_subchain(RoundTree tree, PoolId pool, int honestLengthNow) {
    tree.fork(pool, honestLengthNow);
    return tree;
}

RoundTree append_block(RoundTree tree, PoolId pool) {
    tree.append(pool);
    return tree;
}

SortedLengths sorted_lengths(const RoundTree& tree) {
    SortedLengths out;
    out.entries.reserve(tree.chains().size());
    for (const auto& c : tree.chains()) out.entries.push_back({c.owner, c.generalized_length()});
    std::stable_sort(out.entries.begin(), out.entries.end(),
                     [](const LengthEntry& a, const LengthEntry& b) { return a.length > b.length; });
    out.omega1 = out.entries[0].length;
    out.omega2 = out.entries[1].length;
    out.leader = out.entries[0].pool;
    return out;
}

TerminationVerdict check_termination(const SortedLengths& lengths, int leadThreshold) {
    const int lead = lengths.lead();
    if (lead < leadThreshold) return TerminationVerdict::proceed();
    // Honest lead above the threshold is unreachable under single-block
    // events; it is treated as a win rather than left without a verdict.
    if (lengths.leader.honest()) return {TerminationVerdict::Kind::HonestWin, lengths.leader};
    return {TerminationVerdict::Kind::DishonestEligible, lengths.leader};
}

std::vector<Block> select_main_chain(const RoundTree& tree, PoolId winner, int released) {
    const SubChain& honest = tree.honest();
    if (winner.honest()) return honest.blocks;

    const SubChain& c = tree.chain(winner);
    if (!c.forked || released < 1 || released > c.length())
        throw Error(Errc::InvalidRelease, "released " + std::to_string(released) + " of " +
                                              std::to_string(c.length()) + " dishonest blocks");
    std::vector<Block> out;
    out.reserve(static_cast<std::size_t>(c.forkPosition + released));
    out.insert(out.end(), honest.blocks.begin(), honest.blocks.begin() + c.forkPosition);
    out.insert(out.end(), c.blocks.begin(), c.blocks.begin() + released);
    return out;
}

}  // namespace forkrace
