#include "forkrace/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>

#include "forkrace/error.hpp"
#include "forkrace/rng.hpp"

namespace forkrace {

SettledRound RoundSettler::settle(RoundOutcome outcome, std::optional<PoolId> nextFirstBlockOwner) {
    SettledRound s;
    s.index = ++settledCount_;
    s.nephew = determine_nephew(outcome, nextFirstBlockOwner);
    const auto uncles = find_uncles(outcome, s.nephew.height, options_.maxUncleDistance);
    s.classification = classify_round(outcome, s.nephew, uncles, s.index);
    s.ratios = round_ratios(outcome, s.classification);
    s.rewards = allocate(outcome, s.classification, prevUncleCount_);
    prevUncleCount_ = s.classification.uncle_count();
    bank_.update(outcome, s.ratios, s.rewards, s.classification);
    s.outcome = std::move(outcome);
    return s;
}

std::optional<SettledRound> RoundSettler::push(RoundOutcome outcome) {
    std::optional<SettledRound> out;
    if (pending_) out = settle(std::move(*pending_), outcome.firstBlockOwner);
    pending_ = std::move(outcome);
    return out;
}

std::optional<SettledRound> RoundSettler::close(std::optional<PoolId> nextFirstBlockOwner) {
    if (!pending_) return std::nullopt;
    if (pending_->reserved == 0 && !nextFirstBlockOwner) return std::nullopt;
    SettledRound s = settle(std::move(*pending_), nextFirstBlockOwner);
    pending_.reset();
    return s;
}

EstimatorBank simulate(const SimConfig& config, std::int64_t rounds, std::uint64_t seed, const RoundObserver& observer,
                       PipelineOptions options) {
    SampledClock clock(config, seed);
    MiningEngine engine(config, clock);
    RoundSettler settler(config.m(), options);
    std::optional<Carryover> carry;
    for (std::int64_t r = 0; r < rounds; ++r) {
        RoundOutcome out = engine.run_round(carry);
        carry = make_carryover(out);
        if (auto s = settler.push(std::move(out)); s && observer) observer(*s);
    }
    std::optional<PoolId> follow;
    if (!carry) follow = engine.draw_first_block_owner();
    if (auto s = settler.close(follow); s && observer) observer(*s);
    return settler.take_bank();
}

std::vector<ReplayRound> replay_script(const EventScript& script, const SimConfig& config, PipelineOptions options) {
    ScriptedClock clock(script.events);
    MiningEngine engine(config, clock);
    RoundSettler settler(config.m(), options);
    std::vector<ReplayRound> rounds;
    std::optional<Carryover> carry = script.carryover;

    for (;;) {
        // Scripted clocks answer without consuming events, so this peeks at
        // the first block of the round about to be played.
        const std::optional<PoolId> nextOwner = engine.draw_first_block_owner();
        auto out = engine.try_run_round(carry);
        if (!out) {
            if (auto s = settler.close(nextOwner)) rounds.back().settled = std::move(s);
            break;
        }
        carry = make_carryover(*out);
        rounds.push_back({*out, std::nullopt});
        if (auto s = settler.push(std::move(*out))) rounds[rounds.size() - 2].settled = std::move(s);
    }
    if (rounds.empty()) throw Error(Errc::Incomplete, "script ended before any round closed");
    return rounds;
}

SimConfig with_honest_alpha(const SimConfig& base, double alphaH) {
    SimConfig c = base;
    double rest = 0.0;
    for (std::size_t j = 2; j < c.pools.size(); ++j) rest += c.pools[j].alpha;
    double a1 = 1.0 - alphaH - rest;
    if (a1 < -1e-12)
        throw Error(Errc::InvalidConfig, "alpha_H = " + std::to_string(alphaH) + " leaves negative power for pool 1");
    c.pools[0].alpha = alphaH;
    c.pools[1].alpha = std::max(0.0, a1);
    return c;
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
    const auto threads = static_cast<std::size_t>(std::max(1, workers));
    if (threads == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failureMutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(threads, count); ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failureMutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

ThresholdEstimate find_power_threshold(const SimConfig& base, const std::vector<double>& alphaGrid, int replications,
                                       std::int64_t roundsPerRun, std::uint64_t masterSeed, int workers) {
    const std::size_t reps = static_cast<std::size_t>(std::max(1, replications));
    std::vector<SimConfig> configs;
    for (double a : alphaGrid) configs.push_back(with_honest_alpha(base, a));

    std::vector<std::vector<double>> pH(alphaGrid.size(), std::vector<double>(reps));
    std::vector<std::vector<double>> p1 = pH;
    parallel_for(alphaGrid.size() * reps, workers, [&](std::size_t job) {
        const std::size_t g = job / reps;
        const std::size_t r = job % reps;
        const EstimatorBank bank = simulate(configs[g], roundsPerRun, child_seed(masterSeed, g, r));
        pH[g][r] = bank.p(kHonest);
        p1[g][r] = bank.p(PoolId(1));
    });
    return locate_crossing(alphaGrid, pH, p1);
}

}  // namespace forkrace
