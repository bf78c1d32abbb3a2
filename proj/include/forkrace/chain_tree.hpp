#pragma once

// Per-round tree of one honest and m dishonest sub-chains.
//
// Heights are counted from the round's genesis (first block = height 1). The
// honest sub-chain is H_1..H_v. A dishonest sub-chain forks once, after the
// honest block H_k, and then holds D_{k,1}..D_{k,l}; its generalized length is
// k + l. A dishonest pool that has not mined this round has length 0.

#include <compare>
#include <cstddef>
#include <vector>

namespace forkrace {

/// Pool index: 0 is the honest pool, 1..m are the dishonest pools.
class PoolId {
public:
    constexpr PoolId() = default;
    constexpr explicit PoolId(int index) : index_(index) {}

    constexpr int index() const { return index_; }
    constexpr bool honest() const { return index_ == 0; }
    constexpr std::size_t slot() const { return static_cast<std::size_t>(index_); }

    friend constexpr auto operator<=>(PoolId, PoolId) = default;

private:
    int index_ = 0;
};

inline constexpr PoolId kHonest{0};

struct Block {
    PoolId owner;
    int height = 0;   // position from the round's genesis
    int ordinal = 0;  // 1-based position within the owner's sequence this round

    friend constexpr bool operator==(const Block&, const Block&) = default;
};

struct SubChain {
    PoolId owner;
    int forkPosition = 0;  // k; always 0 for the honest sub-chain
    std::vector<Block> blocks;
    bool forked = false;
    int forkOrder = -1;  // 0 for the first dishonest fork of the round, 1 for the next, ...

    int length() const { return static_cast<int>(blocks.size()); }
    int generalized_length() const;
};

class RoundTree {
public:
    explicit RoundTree(int m);

    int m() const { return static_cast<int>(chains_.size()) - 1; }
    int pool_count() const { return static_cast<int>(chains_.size()); }

    const SubChain& honest() const { return chains_.front(); }
    const SubChain& chain(PoolId pool) const;
    const std::vector<SubChain>& chains() const { return chains_; }

    int honest_length() const { return honest().length(); }
    int generalized_length(PoolId pool) const { return chain(pool).generalized_length(); }

    /// First-forked dishonest pool, or kHonest when nobody has forked.
    PoolId first_forked() const;

    // In-place mutators used by the event loop; the free functions below are
    // the value-semantic equivalents.
    void fork(PoolId pool, int honestLengthNow);
    void append(PoolId pool);

private:
    SubChain& mutable_chain(PoolId pool);

    std::vector<SubChain> chains_;
    int forksSoFar_ = 0;
};

RoundTree fork_subchain(RoundTree tree, PoolId pool, int honestLengthNow);
RoundTree append_block(RoundTree tree, PoolId pool);

struct LengthEntry {
    PoolId pool;
    int length = 0;

    friend constexpr bool operator==(const LengthEntry&, const LengthEntry&) = default;
};

struct SortedLengths {
    std::vector<LengthEntry> entries;  // descending length, ties by ascending pool index
    int omega1 = 0;
    int omega2 = 0;
    PoolId leader;

    int lead() const { return omega1 - omega2; }
};

SortedLengths sorted_lengths(const RoundTree& tree);

struct TerminationVerdict {
    enum class Kind { Continue, HonestWin, DishonestEligible };

    Kind kind = Kind::Continue;
    PoolId pool;  // winner for HonestWin / DishonestEligible

    static constexpr TerminationVerdict proceed() { return {}; }
    friend constexpr bool operator==(const TerminationVerdict&, const TerminationVerdict&) = default;
};

/// Two-block leading rule. The honest leader wins once its lead reaches the
/// threshold; a dishonest leader with lead >= threshold is only *eligible*
/// and the caller's policy decides whether the round actually ends.
TerminationVerdict check_termination(const SortedLengths& lengths, int leadThreshold = 2);

/// Blocks pegged onto the blockchain: H_1..H_v for an honest winner,
/// H_1..H_k followed by D_{k,1}..D_{k,released} for a dishonest winner.
std::vector<Block> select_main_chain(const RoundTree& tree, PoolId winner, int released);

}  // namespace forkrace
