#include "doctest.h"
#include "forkrace/error.hpp"
#include "forkrace/simulation.hpp"
#include "forkrace/uncle_classifier.hpp"
#include "helpers.hpp"

using namespace forkrace;
using namespace forkrace::testing;

namespace {

int count_kind(const Classification& c, BlockClass::Kind kind) {
    int n = 0;
    for (const auto& b : c.labels) n += b.label.kind == kind;
    return n;
}

const BlockClass* label_of(const Classification& c, PoolId owner, int height) {
    for (const auto& b : c.labels)
        if (b.block.owner == owner && b.block.height == height) return &b.label;
    return nullptr;
}

}  // namespace

TEST_SUITE("uncle-classifier") {
    TEST_CASE("determine_nephew") {
        CHECK(determine_nephew(make_outcome(kHonest, 4, {{}, {}}), kHonest) == Nephew{kHonest, 5});
        // Reserved blocks: the first of them is the nephew, whatever comes next.
        CHECK(determine_nephew(make_outcome(PoolId(1), 1, {{true, 0, 4}, {}}, 2), std::nullopt) ==
              Nephew{PoolId(1), 3});
        CHECK(determine_nephew(make_outcome(PoolId(1), 3, {{true, 1, 3}, {}}, 3), PoolId(2)) == Nephew{PoolId(2), 5});
        CHECK_THROWS_AS(determine_nephew(make_outcome(kHonest, 2, {{}, {}}), std::nullopt), Error);
    }

    TEST_CASE("find_uncles examples") {
        const RoundOutcome honest = make_outcome(kHonest, 4, {{true, 1, 2}, {true, 0, 1}});
        CHECK(find_uncles(honest, 5) == std::vector<UncleRef>{{PoolId(2), 1, 4}, {PoolId(1), 2, 3}});

        const RoundOutcome dis = make_outcome(PoolId(1), 2, {{true, 0, 4}, {}}, 4);
        CHECK(find_uncles(dis, 5) == std::vector<UncleRef>{{kHonest, 1, 4}});

        const RoundOutcome far = make_outcome(kHonest, 9, {{true, 0, 7}});
        CHECK(find_uncles(far, 10).empty());
    }

    TEST_CASE("find_uncles: honest uncle excludes forks hanging off later honest blocks") {
        // Pool 1 wins from k = 0; pool 2 forked at k = 1 after H_1, which is itself an uncle.
        const RoundOutcome o = make_outcome(PoolId(1), 2, {{true, 0, 4}, {true, 1, 1}}, 4);
        CHECK(find_uncles(o, 5) == std::vector<UncleRef>{{kHonest, 1, 4}});
        // With H_1 out of range the pool-2 fork becomes eligible.
        CHECK(find_uncles(o, 5, 3) == std::vector<UncleRef>{{PoolId(2), 2, 3}});
    }

    TEST_CASE("uncle and nephew rewards") {
        CHECK(uncle_reward(1) == Rational(7, 8));
        CHECK(uncle_reward(6) == Rational(2, 8));
        for (int d = 1; d <= 6; ++d) CHECK(uncle_reward(d) == Rational(8 - d, 8));
        CHECK_THROWS_AS(uncle_reward(7), Error);
        CHECK_THROWS_AS(uncle_reward(0), Error);
        try {
            uncle_reward(7);
        } catch (const Error& e) {
            CHECK(e.code() == Errc::NotAnUncle);
        }
        CHECK(nephew_reward(0) == Rational(0));
        CHECK(nephew_reward(2) == Rational(1, 16));
        CHECK(nephew_reward(3) == Rational(3, 32));
        for (int n = 0; n < 10; ++n) CHECK(nephew_reward(n) == Rational(n) * nephew_reward(1));
    }

    TEST_CASE("classify_round examples") {
        const RoundOutcome honest = make_outcome(kHonest, 4, {{true, 1, 2}, {true, 0, 1}});
        const Nephew n{kHonest, 5};
        const Classification c = classify_round(honest, n, find_uncles(honest, 5));
        CHECK(c.regularCount == 4);
        CHECK(c.uncle_count() == 2);
        CHECK(c.orphanCount == 3);
        CHECK(c.staleCount == 1);
        REQUIRE(label_of(c, PoolId(1), 3) != nullptr);
        CHECK(label_of(c, PoolId(1), 3)->kind == BlockClass::Kind::Stale);
        CHECK(label_of(c, PoolId(1), 2)->kind == BlockClass::Kind::Uncle);
        CHECK(label_of(c, PoolId(1), 2)->distance == 3);
        CHECK(label_of(c, PoolId(2), 1)->distance == 4);

        const RoundOutcome tree1 = make_outcome(kHonest, 2, {{}, {}});
        const Classification c1 = classify_round(tree1, {kHonest, 3}, find_uncles(tree1, 3));
        CHECK(c1.regularCount == 2);
        CHECK(c1.orphanCount == 0);

        const RoundOutcome dis = make_outcome(PoolId(1), 2, {{true, 0, 4}, {}}, 4);
        const Classification c2 = classify_round(dis, {kHonest, 5}, find_uncles(dis, 5));
        CHECK(c2.regularCount == 4);
        CHECK(c2.orphanCount == 2);
        CHECK(label_of(c2, kHonest, 1)->kind == BlockClass::Kind::Uncle);
        CHECK(label_of(c2, kHonest, 1)->distance == 4);
        CHECK(label_of(c2, kHonest, 2)->kind == BlockClass::Kind::Stale);
        CHECK(count_kind(c2, BlockClass::Kind::Regular) == 4);
    }

    TEST_CASE("reserved blocks are not observed in the round that reserves them") {
        const RoundOutcome o = make_outcome(PoolId(1), 1, {{true, 0, 4}, {}}, 2);
        const Nephew n = determine_nephew(o, std::nullopt);
        const Classification c = classify_round(o, n, find_uncles(o, n.height));
        CHECK(c.observed_count() == 3);  // H_1, D_1, D_2
        CHECK(c.regularCount == 2);
        CHECK(label_of(c, PoolId(1), 3) == nullptr);
        // H_1 is at distance 3 - 1 = 2 from the first reserved block.
        REQUIRE(c.uncle_count() == 1);
        CHECK(c.uncles[0].distance == 2);
    }

    TEST_CASE("round_ratios examples") {
        const RoundOutcome honest = make_outcome(kHonest, 4, {{true, 1, 2}, {true, 0, 1}});
        const Classification c = classify_round(honest, {kHonest, 5}, find_uncles(honest, 5));
        const RoundRatios r = round_ratios(honest, c);
        CHECK(r.chainQuality == Rational(1));
        CHECK(r.mainChainRatio == Rational(4, 7));
        CHECK(r.orphanRatio == Rational(3, 7));
        CHECK(r.uncleRatio == Rational(2, 7));
        CHECK(r.staleRatio == Rational(1, 7));

        const RoundOutcome dis = make_outcome(PoolId(1), 3, {{true, 1, 3}, {true, 0, 2}}, 3);
        const Classification cd = classify_round(dis, {kHonest, 5}, find_uncles(dis, 5));
        const RoundRatios rd = round_ratios(dis, cd);
        CHECK(cd.uncle_count() == 2);
        CHECK(rd.chainQuality == Rational(1, 4));
        CHECK(rd.mainChainRatio == Rational(1, 2));
        CHECK(rd.orphanRatio == Rational(1, 2));
        CHECK(rd.uncleRatio == Rational(1, 4));
        CHECK(rd.staleRatio == Rational(1, 4));

        const RoundOutcome tree1 = make_outcome(kHonest, 2, {{}, {}});
        const RoundRatios r1 = round_ratios(tree1, classify_round(tree1, {kHonest, 3}, {}));
        CHECK(r1.mainChainRatio == Rational(1));
        CHECK(r1.orphanRatio == Rational(0));
        CHECK(r1.uncleRatio == Rational(0));
        CHECK(r1.staleRatio == Rational(0));
    }

    TEST_CASE("simulated rounds satisfy the classification identities exactly") {
        for (const auto& alphas : {std::vector<double>{0.55, 0.32, 0.13}, std::vector<double>{0.4, 0.2, 0.2, 0.2},
                                   std::vector<double>{0.6, 0.4}}) {
            const SimConfig c = SimConfig::from_alphas(alphas);
            int violations = 0;
            simulate(c, 20000, 11, [&](const SettledRound& s) {
                const Classification& k = s.classification;
                const RoundRatios& r = s.ratios;
                if (r.mainChainRatio + r.orphanRatio != Rational(1)) ++violations;
                if (r.orphanRatio != r.uncleRatio + r.staleRatio) ++violations;
                if (s.outcome.winner.honest() && r.chainQuality != Rational(1)) ++violations;
                if (k.staleCount != k.orphanCount - k.uncle_count()) ++violations;
                if (k.regularCount + k.orphanCount != static_cast<int>(k.labels.size())) ++violations;
                std::vector<int> perPool(alphas.size(), 0);
                bool honestUncle = false;
                for (const auto& u : k.uncles) {
                    if (u.distance < 1 || u.distance > 6) ++violations;
                    ++perPool[u.owner.slot()];
                    honestUncle = honestUncle || u.owner.honest();
                }
                for (int n : perPool)
                    if (n > 1) ++violations;
                if (honestUncle && !s.outcome.winner.honest()) {
                    const int kz = s.outcome.stats(s.outcome.winner).k;
                    for (const auto& u : k.uncles)
                        if (!u.owner.honest() && s.outcome.stats(u.owner).k >= kz + 1) ++violations;
                }
                for (const auto& b : k.labels)
                    if (b.label.kind == BlockClass::Kind::Uncle && !b.block.owner.honest() && b.block.ordinal != 1)
                        ++violations;
            });
            CHECK(violations == 0);
        }
    }
}
