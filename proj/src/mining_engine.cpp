#include "forkrace/mining_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "forkrace/error.hpp"

namespace forkrace {

SimConfig SimConfig::from_alphas(const std::vector<double>& alphas, double gamma) {
    SimConfig c;
    c.gamma = gamma;
    for (std::size_t i = 0; i < alphas.size(); ++i) c.pools.push_back({PoolId(static_cast<int>(i)), alphas[i]});
    return c;
}

std::vector<double> SimConfig::alphas() const {
    std::vector<double> out;
    out.reserve(pools.size());
    for (const auto& p : pools) out.push_back(p.alpha);
    return out;
}

void SimConfig::validate() const {
    auto fail = [](const std::string& what) { throw Error(Errc::InvalidConfig, what); };
    if (pools.size() < 2) fail("pools: at least one honest and one dishonest pool required");
    double sum = 0.0;
    bool anyPower = false;
    for (std::size_t i = 0; i < pools.size(); ++i) {
        const double a = pools[i].alpha;
        if (pools[i].id.index() != static_cast<int>(i)) fail("pools[" + std::to_string(i) + "].id: out of order");
        if (!(a >= 0.0 && a <= 1.0)) fail("pools[" + std::to_string(i) + "].alpha: must lie in [0, 1]");
        anyPower = anyPower || a > 0.0;
        sum += a;
    }
    if (!anyPower) fail("pools: every alpha is zero");
    if (sum > 1.0 + alphaSumTolerance) fail("pools: alphas sum to " + std::to_string(sum) + " > 1");
    if (!(gamma > 0.0)) fail("gamma: must be positive");
    if (!(meanBlockTime > 0.0)) fail("meanBlockTime: must be positive");
    if (leadThreshold < 1) fail("leadThreshold: must be positive");
    if (dishonestStopLead < leadThreshold) fail("dishonestStopLead: must be >= leadThreshold");
}

double interarrival_from_draw(double draw, double alpha, double gamma) {
    if (alpha <= 0.0) return kNever;
    return draw * (1.0 / alpha + 1.0 / gamma);
}

double sample_interarrival(SplitMix64& rng, const PoolSpec& pool, const SimConfig& config) {
    if (pool.alpha <= 0.0) return kNever;
    const double u = rng.uniform();
    const double d = -config.meanBlockTime * std::log(1.0 - u);
    return interarrival_from_draw(d, pool.alpha, config.gamma);
}

double SampledClock::next_interarrival(PoolId pool, double /*now*/) {
    return sample_interarrival(rng_, config_->pools[pool.slot()], *config_);
}

double ScriptedClock::next_interarrival(PoolId pool, double now) {
    const auto start = static_cast<std::size_t>(std::llround(now));
    for (std::size_t j = start; j < events_.size(); ++j)
        if (events_[j] == pool) return static_cast<double>(j + 1) - now;
    return kNever;
}

MiningEngine::MiningEngine(SimConfig config, ArrivalClock& clock) : config_(std::move(config)), clock_(&clock) {
    config_.validate();
    next_.assign(config_.pools.size(), kNever);
}

std::optional<PoolId> MiningEngine::draw_first_block_owner() {
    double best = kNever;
    std::optional<PoolId> owner;
    for (int i = 0; i <= config_.m(); ++i) {
        const double t = clock_->next_interarrival(PoolId(i), now_);
        if (t < best) {
            best = t;
            owner = PoolId(i);
        }
    }
    return owner;
}

std::optional<RoundOutcome> MiningEngine::try_run_round(const std::optional<Carryover>& carryover) {
    const int m = config_.m();
    const double start = now_;
    RoundTree tree(m);
    std::optional<PoolId> firstOwner;
    int carried = 0;
    if (carryover && carryover->privateBlocks > 0) {
        tree.fork(carryover->owner, 0);
        for (int b = 0; b < carryover->privateBlocks; ++b) tree.append(carryover->owner);
        firstOwner = carryover->owner;
        carried = carryover->privateBlocks;
    }

    for (int i = 0; i <= m; ++i) next_[static_cast<std::size_t>(i)] = now_ + clock_->next_interarrival(PoolId(i), now_);

    int mined = 0;
    SortedLengths lengths;
    PoolId winner;
    for (;;) {
        const auto it = std::min_element(next_.begin(), next_.end());  // first minimum = lowest index
        if (*it == kNever) return std::nullopt;
        const PoolId pool(static_cast<int>(it - next_.begin()));
        now_ = *it;

        if (!pool.honest() && !tree.chain(pool).forked) tree.fork(pool, tree.honest_length());
        tree.append(pool);
        ++mined;
        if (!firstOwner) firstOwner = pool;
        *it = now_ + clock_->next_interarrival(pool, now_);

        lengths = sorted_lengths(tree);
        const TerminationVerdict verdict = check_termination(lengths, config_.leadThreshold);
        if (verdict.kind == TerminationVerdict::Kind::HonestWin) {
            winner = verdict.pool;
            break;
        }
        if (verdict.kind == TerminationVerdict::Kind::DishonestEligible && lengths.lead() >= config_.dishonestStopLead) {
            winner = verdict.pool;
            break;
        }
    }

    RoundOutcome out;
    out.winner = winner;
    out.v = tree.honest_length();
    out.perPool.resize(static_cast<std::size_t>(m) + 1);
    out.perPool[0] = {true, 0, out.v};
    for (int i = 1; i <= m; ++i) {
        const SubChain& c = tree.chain(PoolId(i));
        out.perPool[static_cast<std::size_t>(i)] = {c.forked, c.forkPosition, c.length()};
    }
    out.omega1 = lengths.omega1;
    out.omega2 = lengths.omega2;
    if (!winner.honest()) {
        const PoolRoundStats& w = out.stats(winner);
        out.phi = config_.releasePolicy == ReleasePolicy::ReleaseAll
                      ? w.l
                      : std::max(1, lengths.omega2 + config_.leadThreshold - w.k);
        out.reserved = w.l - out.phi;
    }
    out.peggedBlocks = select_main_chain(tree, winner, out.phi);
    out.duration = now_ - start;
    out.tree = std::move(tree);
    out.firstBlockOwner = *firstOwner;
    out.carriedIn = carried;
    out.minedBlocks = mined;
    return out;
}

RoundOutcome MiningEngine::run_round(const std::optional<Carryover>& carryover) {
    auto out = try_run_round(carryover);
    if (!out) throw Error(Errc::Incomplete, "event source exhausted before the round terminated");
    return std::move(*out);
}

RoundOutcome run_round(const SimConfig& config, const std::optional<Carryover>& carryover, SplitMix64& rng) {
    SampledClock clock(config, rng);
    MiningEngine engine(config, clock);
    RoundOutcome out = engine.run_round(carryover);
    rng = clock.rng();
    return out;
}

std::optional<Carryover> make_carryover(const RoundOutcome& outcome) {
    if (outcome.reserved <= 0) return std::nullopt;
    return Carryover{outcome.winner, outcome.reserved, true};
}

}  // namespace forkrace
