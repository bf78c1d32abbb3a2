#pragma once

#include <cstdint>
#include <limits>

namespace forkrace {

/// SplitMix64: a counter-based 64-bit generator. The state is a Weyl counter
/// and every output is a bijective mix of it, so streams are cheap to derive
/// and fully determined by their seed.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit constexpr SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    /// Uniform double in [0, 1) built from the top 53 bits.
    constexpr double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    constexpr std::uint64_t state() const { return state_; }

    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

/// Seed of the independent stream identified by (master, a, b), e.g. a grid
/// point and a replication index.
constexpr std::uint64_t child_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t h = SplitMix64::mix(master + 0x9e3779b97f4a7c15ULL);
    h = SplitMix64::mix(h ^ (a * 0xd1342543de82ef95ULL + 0x632be59bd9b4e019ULL));
    h = SplitMix64::mix(h ^ (b * 0xaf251af3b0f025b5ULL + 0x1b873593ULL));
    return h;
}

}  // namespace forkrace
