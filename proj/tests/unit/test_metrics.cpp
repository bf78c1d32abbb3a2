#include <cmath>
#include <random>

#include "doctest.h"
#include "forkrace/error.hpp"
#include "forkrace/metrics.hpp"
#include "forkrace/simulation.hpp"
#include "helpers.hpp"

using namespace forkrace;
using namespace forkrace::testing;

namespace {

bool close_rel(double a, double b, double tol = 1e-12) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) <= tol * scale || a == b;
}

// Feeds one hand-built settled round into a bank.
void feed(EstimatorBank& bank, const RoundOutcome& o, int index, int prevUncles, std::optional<PoolId> next,
          double duration = 1.0) {
    RoundOutcome copy = o;
    copy.duration = duration;
    const Nephew n = determine_nephew(copy, next);
    const Classification c = classify_round(copy, n, find_uncles(copy, n.height), index);
    bank.update(copy, round_ratios(copy, c), allocate(copy, c, prevUncles), c);
}

void check_banks_equal(const EstimatorBank& a, const EstimatorBank& b) {
    REQUIRE(a.rounds() == b.rounds());
    const int m = a.m();
    for (int w = 0; w <= m; ++w) {
        CHECK(a.wins(PoolId(w)) == b.wins(PoolId(w)));
        CHECK(a.reward_units(PoolId(w)) == b.reward_units(PoolId(w)));
        CHECK(close_rel(a.reward(PoolId(w)).mean(), b.reward(PoolId(w)).mean()));
        CHECK(close_rel(a.reward(PoolId(w)).m2(), b.reward(PoolId(w)).m2(), 1e-9));
        for (int h = 0; h <= m; ++h) {
            CHECK(a.nephew_count(PoolId(w), PoolId(h)) == b.nephew_count(PoolId(w), PoolId(h)));
            CHECK(a.uncle_count(PoolId(w), PoolId(h)) == b.uncle_count(PoolId(w), PoolId(h)));
            CHECK(close_rel(a.mean_uncle_reward(PoolId(w), PoolId(h)), b.mean_uncle_reward(PoolId(w), PoolId(h))));
        }
        if (w > 0) {
            CHECK(close_rel(a.k_given_win(PoolId(w)).mean(), b.k_given_win(PoolId(w)).mean()));
            CHECK(close_rel(a.phi_given_win(PoolId(w)).mean(), b.phi_given_win(PoolId(w)).mean()));
        }
        for (std::size_t i = 0; i < kRatioCount; ++i)
            CHECK(close_rel(a.ratio_given_win(PoolId(w), static_cast<RatioIndex>(i)).mean(),
                            b.ratio_given_win(PoolId(w), static_cast<RatioIndex>(i)).mean()));
    }
    CHECK(close_rel(a.v_given_honest().mean(), b.v_given_honest().mean()));
    for (std::size_t i = 0; i < kRatioCount; ++i)
        CHECK(close_rel(a.ratio(static_cast<RatioIndex>(i)).mean(), b.ratio(static_cast<RatioIndex>(i)).mean()));
    CHECK(close_rel(a.duration().mean(), b.duration().mean()));
    CHECK(close_rel(a.total_time(), b.total_time()));
    CHECK(a.total_pegged() == b.total_pegged());
    CHECK(close_rel(growth_rate(a).direct, growth_rate(b).direct));
    CHECK(close_rel(growth_rate(a).decomposition, growth_rate(b).decomposition));
}

}  // namespace

TEST_SUITE("metrics") {
    TEST_CASE("StreamingMean") {
        StreamingMean s;
        for (double x : {1.0, 2.0, 3.0, 4.0}) s.add(x);
        CHECK(s.count() == 4);
        CHECK(s.mean() == doctest::Approx(2.5));
        CHECK(s.variance() == doctest::Approx(5.0 / 3.0));
        CHECK(s.sum() == doctest::Approx(10.0));

        StreamingMean a, b, all;
        std::mt19937_64 gen(1);
        std::normal_distribution<double> nd(3.0, 2.0);
        for (int i = 0; i < 1000; ++i) {
            const double x = nd(gen);
            (i < 300 ? a : b).add(x);
            all.add(x);
        }
        StreamingMean ab = a, ba = b;
        ab.merge(b);
        ba.merge(a);
        CHECK(close_rel(ab.mean(), all.mean()));
        CHECK(close_rel(ab.variance(), all.variance(), 1e-10));
        CHECK(ab.count() == ba.count());
        CHECK(close_rel(ab.mean(), ba.mean()));
        StreamingMean e = a;
        e.merge(StreamingMean{});
        CHECK(e.mean() == a.mean());
    }

    TEST_CASE("win frequencies") {
        EstimatorBank bank(2);
        feed(bank, make_outcome(kHonest, 2, {{}, {}}), 1, 0, kHonest);
        CHECK(bank.p(kHonest) == 1.0);
        CHECK(bank.p(PoolId(1)) == 0.0);
        feed(bank, make_outcome(PoolId(1), 0, {{true, 0, 2}, {}}, 2), 2, 0, kHonest);
        feed(bank, make_outcome(kHonest, 2, {{}, {}}), 3, 0, kHonest);
        CHECK(bank.p(kHonest) == doctest::Approx(2.0 / 3.0));
        CHECK(bank.p(PoolId(1)) == doctest::Approx(1.0 / 3.0));
        CHECK(bank.wins(kHonest) + bank.wins(PoolId(1)) + bank.wins(PoolId(2)) == bank.rounds());
    }

    TEST_CASE("degenerate race: v-bar = 2, p_H = 1, growth = honest reward rate") {
        const SimConfig c = SimConfig::from_alphas({1.0, 0.0, 0.0});
        const EstimatorBank bank = simulate(c, 10000, 8);
        CHECK(bank.p(kHonest) == 1.0);
        CHECK(bank.v_given_honest().mean() == 2.0);
        CHECK(bank.v_given_honest().variance() == 0.0);
        const auto rates = reward_rates(bank);
        CHECK(close_rel(rates[0].direct, growth_rate(bank).direct));
        CHECK(rates[1].direct == 0.0);
    }

    TEST_CASE("growth rate by substitution") {
        EstimatorBank bank(1);
        feed(bank, make_outcome(kHonest, 2, {{}}), 1, 0, kHonest, 33.0);
        const RateEstimate g = growth_rate(bank);
        CHECK(g.direct == doctest::Approx(2.0 / 33.0));
        CHECK(g.decomposition == doctest::Approx(2.0 / 33.0));
        CHECK_THROWS_AS(growth_rate(EstimatorBank(1)), Error);
        CHECK_THROWS_AS(reward_rates(EstimatorBank(1)), Error);
        CHECK_THROWS_AS(ratio_averages(EstimatorBank(1)), Error);
    }

    TEST_CASE("ratio averages") {
        EstimatorBank honestOnly(1);
        for (int i = 1; i <= 5; ++i) feed(honestOnly, make_outcome(kHonest, 2, {{}}), i, 0, kHonest);
        CHECK(ratio_averages(honestOnly).direct[kCQ] == 1.0);

        EstimatorBank two(2);
        feed(two, make_outcome(kHonest, 2, {{}, {}}), 1, 0, kHonest);
        // k = 1, phi = 3: c_Q = 1/4.
        feed(two, make_outcome(PoolId(1), 3, {{true, 1, 3}, {true, 0, 2}}, 3), 2, 0, kHonest);
        const RatioAverages avg = ratio_averages(two);
        CHECK(avg.direct[kCQ] == doctest::Approx(5.0 / 8.0));
        for (std::size_t i = 0; i < kRatioCount; ++i) CHECK(close_rel(avg.direct[i], avg.decomposed[i]));
    }

    TEST_CASE("simulated ratio means keep the identities; decomposed equals direct") {
        const EstimatorBank bank = simulate(SimConfig::from_alphas({0.55, 0.32, 0.13}), 20000, 4);
        const RatioAverages avg = ratio_averages(bank);
        CHECK(std::abs(avg.direct[kRM] + avg.direct[kRO] - 1.0) < 1e-12);
        CHECK(std::abs(avg.direct[kRO] - avg.direct[kRU] - avg.direct[kRS]) < 1e-12);
        for (std::size_t i = 0; i < kRatioCount; ++i) CHECK(close_rel(avg.direct[i], avg.decomposed[i], 1e-12));
    }

    TEST_CASE("reward rates add up to booked rewards over time") {
        const EstimatorBank bank = simulate(SimConfig::from_alphas({0.6, 0.3, 0.1}), 20000, 6);
        const auto rates = reward_rates(bank);
        double sum = 0.0;
        std::int64_t units = 0;
        for (int p = 0; p <= bank.m(); ++p) {
            sum += rates[static_cast<std::size_t>(p)].direct;
            units += bank.reward_units(PoolId(p));
        }
        CHECK(close_rel(sum, static_cast<double>(units) / kRewardUnitsPerBlock / bank.total_time(), 1e-12));
    }

    TEST_CASE("joint and conditional q differ by the win frequency") {
        const EstimatorBank bank = simulate(SimConfig::from_alphas({0.55, 0.32, 0.13}), 20000, 9);
        for (int w = 0; w <= 2; ++w)
            for (int h = 0; h <= 2; ++h) {
                const PoolId W(w), H(h);
                CHECK(close_rel(bank.q_uncle_joint(W, H), bank.p(W) * bank.q_uncle_conditional(W, H)));
                CHECK(close_rel(bank.q_nephew_joint(W, H), bank.p(W) * bank.q_nephew_conditional(W, H)));
            }
    }

    TEST_CASE("merge: identity, commutativity, shape check, and chunked re-streaming") {
        const SimConfig c = SimConfig::from_alphas({0.55, 0.32, 0.13});
        EstimatorBank whole(2);
        std::array<EstimatorBank, 4> chunks{EstimatorBank(2), EstimatorBank(2), EstimatorBank(2), EstimatorBank(2)};
        int n = 0;
        simulate(c, 10000, 17, [&](const SettledRound& s) {
            whole.update(s.outcome, s.ratios, s.rewards, s.classification);
            chunks[static_cast<std::size_t>(n++ * 4 / 10000)].update(s.outcome, s.ratios, s.rewards,
                                                                     s.classification);
        });
        EstimatorBank merged = merge(merge(chunks[0], chunks[1]), merge(chunks[2], chunks[3]));
        check_banks_equal(merged, whole);
        check_banks_equal(merge(chunks[3], merge(chunks[1], merge(chunks[2], chunks[0]))), whole);
        check_banks_equal(merge(whole, EstimatorBank(2)), whole);
        check_banks_equal(merge(EstimatorBank(2), whole), whole);
        check_banks_equal(merge(chunks[0], chunks[1]), merge(chunks[1], chunks[0]));
        // simulate() returns the same bank it streamed.
        check_banks_equal(simulate(c, 10000, 17), whole);

        EstimatorBank other(3);
        try {
            whole.merge(other);
            FAIL("expected MergeShapeError");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::MergeShapeError);
        }
    }

    TEST_CASE("ci95") {
        const ConfidenceInterval ci = ci95({1.0, 2.0, 3.0, 4.0});
        CHECK(ci.mean == doctest::Approx(2.5));
        CHECK(ci.hi - ci.mean == doctest::Approx(1.96 * std::sqrt((5.0 / 3.0) / 4.0)));
        CHECK(ci.overlaps({0.0, 3.0, 5.0}));
        CHECK_FALSE(ci.overlaps({10.0, 9.0, 11.0}));
        const ConfidenceInterval one = ci95({0.3});
        CHECK(one.lo == one.hi);
    }

    TEST_CASE("locate_crossing") {
        const std::vector<double> grid{0.6, 0.65, 0.7};
        // p_1 - p_H: +0.1, +0.02, -0.06 -> crossing at 0.65 + 0.05 * 0.02 / 0.08.
        const std::vector<std::vector<double>> pH{{0.40, 0.40}, {0.48, 0.48}, {0.56, 0.56}};
        const std::vector<std::vector<double>> p1{{0.50, 0.50}, {0.50, 0.50}, {0.50, 0.50}};
        const ThresholdEstimate t = locate_crossing(grid, pH, p1);
        CHECK(t.alphaStar == doctest::Approx(0.6625));
        CHECK(t.bracketLo == 1);
        CHECK(t.bracketHi == 2);
        CHECK(t.ci.lo == doctest::Approx(0.6625));
        CHECK(1.0 - t.alphaStar - 0.1 == doctest::Approx(0.2375));

        const std::vector<std::vector<double>> above{{0.6}, {0.7}, {0.8}};
        const std::vector<std::vector<double>> below{{0.3}, {0.2}, {0.1}};
        try {
            locate_crossing(grid, above, below);
            FAIL("expected NoCrossing");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::NoCrossing);
        }
    }

    TEST_CASE("find_power_threshold is independent of the worker count") {
        const SimConfig base = SimConfig::from_alphas({0.5, 0.4, 0.1});
        const std::vector<double> grid{0.40, 0.45, 0.50, 0.55};
        const ThresholdEstimate a = find_power_threshold(base, grid, 4, 2000, 5, 1);
        const ThresholdEstimate b = find_power_threshold(base, grid, 4, 2000, 5, 3);
        CHECK(a.alphaStar == b.alphaStar);
        CHECK(a.ci.lo == b.ci.lo);
        CHECK(a.meanHonest == b.meanHonest);
    }

    TEST_CASE("with_honest_alpha redistributes to pool 1") {
        const SimConfig base = SimConfig::from_alphas({0.6, 0.3, 0.1});
        const SimConfig c = with_honest_alpha(base, 0.7);
        CHECK(c.pools[0].alpha == 0.7);
        CHECK(c.pools[1].alpha == doctest::Approx(0.2));
        CHECK(c.pools[2].alpha == 0.1);
        CHECK_THROWS_AS(with_honest_alpha(base, 0.95), Error);
    }
}
