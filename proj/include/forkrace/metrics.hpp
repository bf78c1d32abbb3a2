#pragma once

// Streaming estimators for win probabilities, nephew/uncle frequencies,
// per-round ratio averages and the renewal-reward rates (blocks per second
// pegged, reward per second per pool). Banks are worker-local and merged.

#include <array>
#include <cstdint>
#include <vector>

#include "forkrace/mining_engine.hpp"
#include "forkrace/reward_allocator.hpp"
#include "forkrace/uncle_classifier.hpp"

namespace forkrace {

/// Welford running mean/variance with Chan's pairwise merge.
class StreamingMean {
public:
    void add(double x);
    void merge(const StreamingMean& other);

    std::int64_t count() const { return count_; }
    double mean() const { return mean_; }
    double m2() const { return m2_; }
    /// Unbiased sample variance; 0 with fewer than two samples.
    double variance() const;
    double sum() const { return mean_ * static_cast<double>(count_); }

private:
    std::int64_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

enum RatioIndex : std::size_t { kCQ = 0, kRM, kRO, kRU, kRS, kRatioCount };

/// Rewards are kept as integer multiples of 1/32 block so sums stay exact.
inline constexpr std::int64_t kRewardUnitsPerBlock = 32;
std::int64_t to_reward_units(const Rational& r);

class EstimatorBank {
public:
    EstimatorBank() = default;
    explicit EstimatorBank(int m);

    void update(const RoundOutcome& outcome, const RoundRatios& ratios, const RewardVector& rewards,
                const Classification& classification);
    /// Throws MergeShapeError if the banks track different pool counts.
    void merge(const EstimatorBank& other);

    int m() const { return m_; }
    std::int64_t rounds() const { return rounds_; }

    std::int64_t wins(PoolId pool) const { return winCounts_[pool.slot()]; }
    double p(PoolId pool) const;

    // Counts of rounds won by `winner` in which `holder` holds the nephew /
    // has an uncle.
    std::int64_t nephew_count(PoolId winner, PoolId holder) const { return nephewCounts_[cell(winner, holder)]; }
    std::int64_t uncle_count(PoolId winner, PoolId holder) const { return uncleCounts_[cell(winner, holder)]; }
    double q_nephew_joint(PoolId winner, PoolId holder) const;
    double q_uncle_joint(PoolId winner, PoolId holder) const;
    double q_nephew_conditional(PoolId winner, PoolId holder) const;
    double q_uncle_conditional(PoolId winner, PoolId holder) const;
    /// Mean reward of the holder's nephew / uncle over the rounds counted above.
    double mean_nephew_reward(PoolId winner, PoolId holder) const;
    double mean_uncle_reward(PoolId winner, PoolId holder) const;

    // Conditional means given the winner: v given an honest win; k, l, phi
    // given a win by that dishonest pool.
    const StreamingMean& v_given_honest() const { return condV_; }
    const StreamingMean& k_given_win(PoolId pool) const { return condK_[pool.slot()]; }
    const StreamingMean& l_given_win(PoolId pool) const { return condL_[pool.slot()]; }
    const StreamingMean& phi_given_win(PoolId pool) const { return condPhi_[pool.slot()]; }

    const StreamingMean& ratio(RatioIndex which) const { return ratios_[which]; }
    const StreamingMean& ratio_given_win(PoolId winner, RatioIndex which) const {
        return condRatios_[winner.slot()][which];
    }

    const StreamingMean& duration() const { return duration_; }
    const StreamingMean& pegged_blocks() const { return pegged_; }
    std::int64_t total_pegged() const { return totalPegged_; }
    double total_time() const { return totalTime_; }

    const StreamingMean& reward(PoolId pool) const { return reward_[pool.slot()]; }
    std::int64_t reward_units(PoolId pool) const { return rewardUnits_[pool.slot()]; }

private:
    std::size_t cell(PoolId winner, PoolId holder) const {
        return winner.slot() * static_cast<std::size_t>(m_ + 1) + holder.slot();
    }

    int m_ = 0;
    std::int64_t rounds_ = 0;
    std::vector<std::int64_t> winCounts_;
    std::vector<std::int64_t> nephewCounts_;
    std::vector<std::int64_t> uncleCounts_;
    std::vector<std::int64_t> nephewUnits_;
    std::vector<std::int64_t> uncleUnits_;
    StreamingMean condV_;
    std::vector<StreamingMean> condK_, condL_, condPhi_;
    std::array<StreamingMean, kRatioCount> ratios_{};
    std::vector<std::array<StreamingMean, kRatioCount>> condRatios_;
    StreamingMean duration_;
    StreamingMean pegged_;
    std::int64_t totalPegged_ = 0;
    double totalTime_ = 0.0;
    std::vector<StreamingMean> reward_;
    std::vector<std::int64_t> rewardUnits_;
};

EstimatorBank merge(EstimatorBank a, const EstimatorBank& b);

struct RateEstimate {
    double direct = 0.0;         // totals over total simulated time
    double decomposition = 0.0;  // p / conditional-mean decomposition over E[T1]
};

/// Blocks pegged per second. Throws NoData on an empty bank.
RateEstimate growth_rate(const EstimatorBank& bank);

/// Reward per second for every pool (indexed by pool). Throws NoData.
std::vector<RateEstimate> reward_rates(const EstimatorBank& bank);

struct RatioAverages {
    std::array<double, kRatioCount> direct{};      // mean of per-round ratios
    std::array<double, kRatioCount> decomposed{};  // p_H * mean_H + sum p_i * mean_i
};

RatioAverages ratio_averages(const EstimatorBank& bank);

struct ConfidenceInterval {
    double mean = 0.0;
    double lo = 0.0;
    double hi = 0.0;

    bool overlaps(const ConfidenceInterval& o) const { return lo <= o.hi && o.lo <= hi; }
};

/// Normal-approximation 95% interval of the mean of independent samples.
ConfidenceInterval ci95(const std::vector<double>& samples);

struct ThresholdEstimate {
    double alphaStar = 0.0;   // crossing of the replication-mean curves
    ConfidenceInterval ci;    // over per-replication crossings
    std::size_t bracketLo = 0;  // grid indices bracketing the crossing
    std::size_t bracketHi = 0;
    std::vector<double> meanHonest;
    std::vector<double> meanDishonest;
};

/// Locates p_1 = p_H on a grid by linear interpolation between the first pair
/// of neighbouring grid points whose mean difference changes sign.
/// pHonest[g][r] / pDishonest[g][r] hold replication r at grid point g.
/// Throws NoCrossing when the grid does not bracket a sign change.
ThresholdEstimate locate_crossing(const std::vector<double>& grid, const std::vector<std::vector<double>>& pHonest,
                                  const std::vector<std::vector<double>>& pDishonest);

}  // namespace forkrace
