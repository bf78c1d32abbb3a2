#include <cmath>

#include "doctest.h"
#include "forkrace/error.hpp"
#include "forkrace/mining_engine.hpp"
#include "forkrace/rng.hpp"
#include "helpers.hpp"

using namespace forkrace;
using namespace forkrace::testing;

TEST_SUITE("mining-engine") {
    TEST_CASE("interarrival substitution") {
        CHECK(interarrival_from_draw(15.0, 0.5, 10.0) == doctest::Approx(31.5).epsilon(1e-15));
        CHECK(interarrival_from_draw(15.0, 1.0, 10.0) == doctest::Approx(16.5).epsilon(1e-15));
        CHECK(interarrival_from_draw(15.0, 0.0, 10.0) == kNever);
    }

    TEST_CASE("sampler mean matches 15 * (1/alpha + 1/gamma)") {
        const SimConfig c = SimConfig::from_alphas({0.6, 0.4});
        SplitMix64 rng(42);
        double sum = 0.0;
        const int n = 1'000'000;
        for (int i = 0; i < n; ++i) sum += sample_interarrival(rng, c.pools[0], c);
        CHECK(std::abs(sum / n - 26.5) < 0.1);
    }

    TEST_CASE("a pool without power is never scheduled and draws nothing") {
        const SimConfig c = SimConfig::from_alphas({1.0, 0.0});
        SplitMix64 a(3), b(3);
        CHECK(sample_interarrival(a, c.pools[1], c) == kNever);
        CHECK(a.state() == b.state());
    }

    TEST_CASE("degenerate race: honest wins with v = 2 after two draws") {
        const SimConfig c = SimConfig::from_alphas({1.0, 0.0, 0.0});
        SplitMix64 rng(99);
        for (int r = 0; r < 50; ++r) {
            SplitMix64 copy = rng;
            const double d1 = sample_interarrival(copy, c.pools[0], c);
            const double d2 = sample_interarrival(copy, c.pools[0], c);
            const RoundOutcome o = run_round(c, std::nullopt, rng);
            CHECK(o.winner == kHonest);
            CHECK(o.v == 2);
            CHECK(o.duration == doctest::Approx(d1 + d2).epsilon(1e-12));
        }
    }

    TEST_CASE("degenerate race: mean duration 2 * 15 * (1 + 1/10)") {
        const SimConfig c = SimConfig::from_alphas({1.0, 0.0, 0.0});
        SampledClock clock(c, 5);
        MiningEngine engine(c, clock);
        double total = 0.0;
        const int n = 100'000;
        for (int r = 0; r < n; ++r) total += engine.run_round(std::nullopt).duration;
        CHECK(std::abs(total / n / 33.0 - 1.0) < 0.02);
    }

    TEST_CASE("scripted rounds") {
        const SimConfig c = uniform_config(2);
        auto rounds = replay("H H", c);
        REQUIRE(rounds.size() == 1);
        CHECK(rounds[0].outcome.winner == kHonest);
        CHECK(rounds[0].outcome.v == 2);
        CHECK(rounds[0].outcome.peggedBlocks == std::vector<Block>{{kHonest, 1, 1}, {kHonest, 2, 2}});

        rounds = replay("D1 D1 D1", c);
        REQUIRE(rounds.size() == 1);
        const RoundOutcome& o = rounds[0].outcome;
        CHECK(o.winner == PoolId(1));
        CHECK(o.stats(PoolId(1)).k == 0);
        CHECK(o.stats(PoolId(1)).l == 2);
        CHECK(o.phi == 2);
        CHECK(o.reserved == 0);
        CHECK(o.omega1 - o.omega2 == 2);
        CHECK(o.duration == 2.0);
    }

    TEST_CASE("release policies") {
        SimConfig c = uniform_config(1);
        c.dishonestStopLead = 3;
        auto all = replay("D1 D1 D1", c);
        REQUIRE(all.size() == 1);
        CHECK(all[0].outcome.phi == 3);
        CHECK(all[0].outcome.reserved == 0);

        c.releasePolicy = ReleasePolicy::ReleaseMin;
        auto min = replay("H D1 D1 D1", c);
        REQUIRE(!min.empty());
        const RoundOutcome& o = min[0].outcome;
        // k = 1, l = 3, v = 1: releasing max(1, 1 + 2 - 1) = 2 keeps a two-block lead.
        CHECK(o.stats(PoolId(1)).k == 1);
        CHECK(o.phi == 2);
        CHECK(o.reserved == 1);
        CHECK(o.stats(PoolId(1)).k + o.phi >= o.omega2 + 2);
    }

    TEST_CASE("make_carryover") {
        CHECK_FALSE(make_carryover(make_outcome(kHonest, 2, {{}, {}})).has_value());
        CHECK_FALSE(make_carryover(make_outcome(PoolId(1), 2, {{true, 0, 4}, {}}, 4)).has_value());
        const auto carry = make_carryover(make_outcome(PoolId(1), 2, {{true, 0, 5}, {}}, 3));
        REQUIRE(carry.has_value());
        CHECK(carry->owner == PoolId(1));
        CHECK(carry->privateBlocks == 2);
        CHECK(carry->pendingNephew);
    }

    TEST_CASE("carried blocks pre-fork the owner at k = 0 and need one mined block") {
        SimConfig c = uniform_config(2);
        c.dishonestStopLead = 3;
        c.releasePolicy = ReleasePolicy::ReleaseMin;
        // Three carried blocks already lead by 3; the round still needs an event.
        auto rounds = replay("D1", c, Carryover{PoolId(1), 3, true});
        REQUIRE(rounds.size() == 1);
        const RoundOutcome& o = rounds[0].outcome;
        CHECK(o.carriedIn == 3);
        CHECK(o.minedBlocks == 1);
        CHECK(o.duration > 0.0);
        CHECK(o.firstBlockOwner == PoolId(1));
        CHECK(o.stats(PoolId(1)).k == 0);
        CHECK(o.stats(PoolId(1)).l == 4);
        CHECK_THROWS_AS(replay("", c, Carryover{PoolId(1), 3, true}), Error);
    }

    TEST_CASE("determinism: same seed gives identical rounds") {
        const SimConfig c = SimConfig::from_alphas({0.55, 0.32, 0.13});
        SampledClock ca(c, 1234), cb(c, 1234);
        MiningEngine a(c, ca), b(c, cb);
        std::optional<Carryover> carry;
        for (int r = 0; r < 2000; ++r) {
            const RoundOutcome x = a.run_round(carry);
            const RoundOutcome y = b.run_round(carry);
            CHECK(x.winner == y.winner);
            CHECK(x.v == y.v);
            CHECK(x.duration == y.duration);
            CHECK(x.peggedBlocks == y.peggedBlocks);
            carry = make_carryover(x);
        }
    }

    TEST_CASE("sampled rounds: invariants of the eager ReleaseAll engine") {
        for (int m = 1; m <= 3; ++m) {
            std::vector<double> alphas{0.5};
            for (int i = 1; i <= m; ++i) alphas.push_back(0.5 / m);
            const SimConfig c = SimConfig::from_alphas(alphas);
            SampledClock clock(c, 77 + m);
            MiningEngine engine(c, clock);
            int firstForkViolations = 0, leadViolations = 0, otherViolations = 0;
            for (int r = 0; r < 20000; ++r) {
                const RoundOutcome o = engine.run_round(std::nullopt);
                if (o.omega1 - o.omega2 != 2) ++leadViolations;
                if (!(o.duration > 0.0)) ++otherViolations;
                const PoolId first = o.tree.first_forked();
                if (!first.honest() && o.tree.chain(first).forkPosition > 1) ++firstForkViolations;
                for (int i = 1; i <= m; ++i) {
                    const SubChain& ch = o.tree.chain(PoolId(i));
                    const PoolRoundStats& s = o.stats(PoolId(i));
                    if (s.forked != ch.forked || s.k != ch.forkPosition || s.l != ch.length()) ++otherViolations;
                    if (ch.forked && ch.forkPosition > o.v) ++otherViolations;
                }
                if (o.winner.honest() && (o.phi != 0 || o.reserved != 0)) ++otherViolations;
                if (!o.winner.honest() && o.stats(o.winner).k + o.phi < o.omega2 + 2) ++otherViolations;
            }
            CHECK(firstForkViolations == 0);
            CHECK(leadViolations == 0);
            CHECK(otherViolations == 0);
        }
    }

    TEST_CASE("config validation") {
        auto invalid = [](SimConfig c) {
            try {
                c.validate();
            } catch (const Error& e) {
                return e.code() == Errc::InvalidConfig;
            }
            return false;
        };
        CHECK(invalid(SimConfig::from_alphas({1.0})));
        CHECK(invalid(SimConfig::from_alphas({0.8, 0.3, 0.1})));
        CHECK(invalid(SimConfig::from_alphas({-0.1, 0.5})));
        CHECK(invalid(SimConfig::from_alphas({0.0, 0.0})));
        SimConfig g = SimConfig::from_alphas({0.5, 0.5});
        g.gamma = 0.0;
        CHECK(invalid(g));
        SimConfig s = SimConfig::from_alphas({0.5, 0.5});
        s.dishonestStopLead = 1;
        CHECK(invalid(s));
        CHECK_NOTHROW(SimConfig::from_alphas({0.6, 0.3, 0.1}).validate());
    }
}
