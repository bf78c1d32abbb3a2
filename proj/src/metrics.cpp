#include "forkrace/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "forkrace/error.hpp"

namespace forkrace {

void StreamingMean::add(double x) {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
}

void StreamingMean::merge(const StreamingMean& other) {
    if (other.count_ == 0) return;
    if (count_ == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(count_);
    const double nb = static_cast<double>(other.count_);
    const double n = na + nb;
    const double delta = other.mean_ - mean_;
    mean_ = (na * mean_ + nb * other.mean_) / n;
    m2_ += other.m2_ + delta * delta * na * nb / n;
    count_ += other.count_;
}

double StreamingMean::variance() const {
    return count_ < 2 ? 0.0 : m2_ / static_cast<double>(count_ - 1);
}

std::int64_t to_reward_units(const Rational& r) {
    if (kRewardUnitsPerBlock % r.den() != 0)
        throw std::domain_error("reward " + r.str() + " is not a multiple of 1/32 block");
    return r.num() * (kRewardUnitsPerBlock / r.den());
}

namespace {

double units_to_blocks(std::int64_t units) {
    return static_cast<double>(units) / static_cast<double>(kRewardUnitsPerBlock);
}

double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

template <typename T>
void add_into(std::vector<T>& into, const std::vector<T>& from) {
    for (std::size_t i = 0; i < into.size(); ++i) into[i] += from[i];
}

void merge_into(std::vector<StreamingMean>& into, const std::vector<StreamingMean>& from) {
    for (std::size_t i = 0; i < into.size(); ++i) into[i].merge(from[i]);
}

}  // namespace

EstimatorBank::EstimatorBank(int m) : m_(m) {
    const auto pools = static_cast<std::size_t>(m) + 1;
    winCounts_.assign(pools, 0);
    nephewCounts_.assign(pools * pools, 0);
    uncleCounts_.assign(pools * pools, 0);
    nephewUnits_.assign(pools * pools, 0);
    uncleUnits_.assign(pools * pools, 0);
    condK_.resize(pools);
    condL_.resize(pools);
    condPhi_.resize(pools);
    condRatios_.resize(pools);
    reward_.resize(pools);
    rewardUnits_.assign(pools, 0);
}

void EstimatorBank::update(const RoundOutcome& outcome, const RoundRatios& ratios, const RewardVector& rewards,
                           const Classification& classification) {
    const PoolId w = outcome.winner;
    ++rounds_;
    ++winCounts_[w.slot()];

    if (w.honest()) {
        condV_.add(outcome.v);
    } else {
        const PoolRoundStats& s = outcome.stats(w);
        condK_[w.slot()].add(s.k);
        condL_[w.slot()].add(s.l);
        condPhi_[w.slot()].add(outcome.phi);
    }

    if (rewards.hasNephew) {
        const std::size_t c = cell(w, rewards.nephewHolder);
        ++nephewCounts_[c];
        nephewUnits_[c] += to_reward_units(rewards.of(rewards.nephewHolder).nephew);
    }
    std::vector<bool> hasUncle(static_cast<std::size_t>(m_) + 1, false);
    for (const auto& u : classification.uncles) {
        hasUncle[u.owner.slot()] = true;
        uncleUnits_[cell(w, u.owner)] += to_reward_units(u.reward);
    }
    for (int p = 0; p <= m_; ++p)
        if (hasUncle[static_cast<std::size_t>(p)]) ++uncleCounts_[cell(w, PoolId(p))];

    const std::array<double, kRatioCount> values{ratios.chainQuality.to_double(), ratios.mainChainRatio.to_double(),
                                                  ratios.orphanRatio.to_double(), ratios.uncleRatio.to_double(),
                                                  ratios.staleRatio.to_double()};
    for (std::size_t i = 0; i < kRatioCount; ++i) {
        ratios_[i].add(values[i]);
        condRatios_[w.slot()][i].add(values[i]);
    }

    duration_.add(outcome.duration);
    totalTime_ += outcome.duration;
    pegged_.add(outcome.pegged_length());
    totalPegged_ += outcome.pegged_length();

    for (int p = 0; p <= m_; ++p) {
        const std::int64_t units = to_reward_units(rewards.perPool[static_cast<std::size_t>(p)].total());
        rewardUnits_[static_cast<std::size_t>(p)] += units;
        reward_[static_cast<std::size_t>(p)].add(units_to_blocks(units));
    }
}

void EstimatorBank::merge(const EstimatorBank& other) {
    if (other.m_ != m_)
        throw Error(Errc::MergeShapeError,
                    "cannot merge banks for m=" + std::to_string(m_) + " and m=" + std::to_string(other.m_));
    rounds_ += other.rounds_;
    add_into(winCounts_, other.winCounts_);
    add_into(nephewCounts_, other.nephewCounts_);
    add_into(uncleCounts_, other.uncleCounts_);
    add_into(nephewUnits_, other.nephewUnits_);
    add_into(uncleUnits_, other.uncleUnits_);
    condV_.merge(other.condV_);
    merge_into(condK_, other.condK_);
    merge_into(condL_, other.condL_);
    merge_into(condPhi_, other.condPhi_);
    for (std::size_t i = 0; i < kRatioCount; ++i) ratios_[i].merge(other.ratios_[i]);
    for (std::size_t p = 0; p < condRatios_.size(); ++p)
        for (std::size_t i = 0; i < kRatioCount; ++i) condRatios_[p][i].merge(other.condRatios_[p][i]);
    duration_.merge(other.duration_);
    pegged_.merge(other.pegged_);
    totalPegged_ += other.totalPegged_;
    totalTime_ += other.totalTime_;
    merge_into(reward_, other.reward_);
    add_into(rewardUnits_, other.rewardUnits_);
}

EstimatorBank merge(EstimatorBank a, const EstimatorBank& b) {
    a.merge(b);
    return a;
}

double EstimatorBank::p(PoolId pool) const {
    return safe_div(static_cast<double>(winCounts_[pool.slot()]), static_cast<double>(rounds_));
}

double EstimatorBank::q_nephew_joint(PoolId winner, PoolId holder) const {
    return safe_div(static_cast<double>(nephew_count(winner, holder)), static_cast<double>(rounds_));
}

double EstimatorBank::q_uncle_joint(PoolId winner, PoolId holder) const {
    return safe_div(static_cast<double>(uncle_count(winner, holder)), static_cast<double>(rounds_));
}

double EstimatorBank::q_nephew_conditional(PoolId winner, PoolId holder) const {
    return safe_div(static_cast<double>(nephew_count(winner, holder)), static_cast<double>(wins(winner)));
}

double EstimatorBank::q_uncle_conditional(PoolId winner, PoolId holder) const {
    return safe_div(static_cast<double>(uncle_count(winner, holder)), static_cast<double>(wins(winner)));
}

double EstimatorBank::mean_nephew_reward(PoolId winner, PoolId holder) const {
    const std::size_t c = cell(winner, holder);
    return safe_div(units_to_blocks(nephewUnits_[c]), static_cast<double>(nephewCounts_[c]));
}

double EstimatorBank::mean_uncle_reward(PoolId winner, PoolId holder) const {
    const std::size_t c = cell(winner, holder);
    return safe_div(units_to_blocks(uncleUnits_[c]), static_cast<double>(uncleCounts_[c]));
}

namespace {

void require_data(const EstimatorBank& bank) {
    if (bank.rounds() == 0) throw Error(Errc::NoData, "estimator bank holds no rounds");
}

}  // namespace

RateEstimate growth_rate(const EstimatorBank& bank) {
    require_data(bank);
    double blocksPerRound = bank.p(kHonest) * bank.v_given_honest().mean();
    for (int i = 1; i <= bank.m(); ++i) {
        const PoolId z(i);
        blocksPerRound += bank.p(z) * (bank.k_given_win(z).mean() + bank.phi_given_win(z).mean());
    }
    return {static_cast<double>(bank.total_pegged()) / bank.total_time(), blocksPerRound / bank.duration().mean()};
}

std::vector<RateEstimate> reward_rates(const EstimatorBank& bank) {
    require_data(bank);
    const int m = bank.m();
    const double meanCycle = bank.duration().mean();
    std::vector<RateEstimate> out(static_cast<std::size_t>(m) + 1);

    auto unc = [&](PoolId w, PoolId p) { return bank.q_uncle_conditional(w, p) * bank.mean_uncle_reward(w, p); };
    auto nep = [&](PoolId w, PoolId p) { return bank.q_nephew_conditional(w, p) * bank.mean_nephew_reward(w, p); };

    // Honest pool.
    double honest = bank.p(kHonest) * (bank.v_given_honest().mean() + nep(kHonest, kHonest));
    for (int z = 1; z <= m; ++z) {
        const PoolId zeta(z);
        honest += bank.p(zeta) * (bank.k_given_win(zeta).mean() + unc(zeta, kHonest) + nep(zeta, kHonest));
    }
    out[0].decomposition = honest / meanCycle;

    // Dishonest pools.
    for (int z = 1; z <= m; ++z) {
        const PoolId zeta(z);
        double r = bank.p(zeta) * (bank.phi_given_win(zeta).mean() + nep(zeta, zeta));
        r += bank.p(kHonest) * (unc(kHonest, zeta) + nep(kHonest, zeta));
        for (int k = 1; k <= m; ++k) {
            if (k == z) continue;
            r += bank.p(PoolId(k)) * (unc(PoolId(k), zeta) + nep(PoolId(k), zeta));
        }
        out[static_cast<std::size_t>(z)].decomposition = r / meanCycle;
    }

    for (int p = 0; p <= m; ++p)
        out[static_cast<std::size_t>(p)].direct = units_to_blocks(bank.reward_units(PoolId(p))) / bank.total_time();
    return out;
}

RatioAverages ratio_averages(const EstimatorBank& bank) {
    require_data(bank);
    RatioAverages out;
    for (std::size_t i = 0; i < kRatioCount; ++i) {
        const auto which = static_cast<RatioIndex>(i);
        out.direct[i] = bank.ratio(which).mean();
        double d = 0.0;
        for (int w = 0; w <= bank.m(); ++w) d += bank.p(PoolId(w)) * bank.ratio_given_win(PoolId(w), which).mean();
        out.decomposed[i] = d;
    }
    return out;
}

ConfidenceInterval ci95(const std::vector<double>& samples) {
    StreamingMean s;
    for (double x : samples) s.add(x);
    const double half = s.count() > 1 ? 1.96 * std::sqrt(s.variance() / static_cast<double>(s.count())) : 0.0;
    return {s.mean(), s.mean() - half, s.mean() + half};
}

ThresholdEstimate locate_crossing(const std::vector<double>& grid, const std::vector<std::vector<double>>& pHonest,
                                  const std::vector<std::vector<double>>& pDishonest) {
    if (grid.size() < 2 || pHonest.size() != grid.size() || pDishonest.size() != grid.size())
        throw Error(Errc::NoCrossing, "grid needs at least two points with matching estimates");

    ThresholdEstimate out;
    std::vector<double> diff(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        out.meanHonest.push_back(ci95(pHonest[g]).mean);
        out.meanDishonest.push_back(ci95(pDishonest[g]).mean);
        diff[g] = out.meanDishonest[g] - out.meanHonest[g];
    }

    std::size_t g = 0;
    for (; g + 1 < grid.size(); ++g)
        if ((diff[g] >= 0.0) != (diff[g + 1] >= 0.0) || diff[g] == 0.0) break;
    if (g + 1 >= grid.size())
        throw Error(Errc::NoCrossing, "p_1 - p_H keeps the same sign over the whole grid");

    auto interpolate = [&](double d0, double d1) {
        if (d0 == d1) return grid[g];
        return grid[g] + (grid[g + 1] - grid[g]) * d0 / (d0 - d1);
    };
    out.bracketLo = g;
    out.bracketHi = g + 1;
    out.alphaStar = interpolate(diff[g], diff[g + 1]);

    std::vector<double> perReplication;
    const std::size_t reps = std::min(pHonest[g].size(), pHonest[g + 1].size());
    for (std::size_t r = 0; r < reps; ++r)
        perReplication.push_back(
            interpolate(pDishonest[g][r] - pHonest[g][r], pDishonest[g + 1][r] - pHonest[g + 1][r]));
    out.ci = ci95(perReplication);
    return out;
}

}  // namespace forkrace
