#include <algorithm>
#include <exception>
#include <sstream>

#include "json.hpp"

#include "forkrace/error.hpp"
#include "forkrace/oracle.hpp"

namespace forkrace::oracle {

namespace {

std::string pool_name(int p) { return p == 0 ? "H" : "D" + std::to_string(p); }

bool same(const Rational& got, const RefFraction& want) {
    return got.num() * want.den == want.num * got.den();
}

std::string fmt(const RefFraction& f) { return std::to_string(f.num) + "/" + std::to_string(f.den); }

template <typename A, typename B>
void expect_eq(std::vector<std::string>& out, const char* what, const A& got, const B& want) {
    if (!(got == want)) {
        std::ostringstream os;
        os << what << ": got " << got << ", reference " << want;
        out.push_back(os.str());
    }
}

}  // namespace

std::string script_to_string(const std::vector<PoolId>& events) {
    std::string s;
    for (const PoolId p : events) {
        if (!s.empty()) s += ' ';
        s += pool_name(p.index());
    }
    return s;
}

std::vector<std::string> compare(const ReplayRound& got, const RefRound& want) {
    std::vector<std::string> d;
    const RoundOutcome& o = got.outcome;
    expect_eq(d, "winner", o.winner.index(), want.winner);
    expect_eq(d, "v", o.v, want.v);
    expect_eq(d, "phi", o.phi, want.phi);
    expect_eq(d, "reserved", o.reserved, want.reserved);
    expect_eq(d, "first block owner", o.firstBlockOwner.index(), want.firstOwner);
    for (std::size_t i = 1; i < o.perPool.size() && i < want.k.size(); ++i) {
        const std::string pool = pool_name(static_cast<int>(i));
        expect_eq(d, (pool + " forked").c_str(), o.perPool[i].forked ? 1 : 0, want.forked[i]);
        expect_eq(d, (pool + " k").c_str(), o.perPool[i].k, want.k[i]);
        expect_eq(d, (pool + " l").c_str(), o.perPool[i].l, want.l[i]);
    }
    const int expectedPegged = want.winner == 0 ? want.v : want.k[want.winner] + want.phi;
    expect_eq(d, "pegged length", o.pegged_length(), expectedPegged);

    if (got.settled.has_value() != want.settled) {
        d.push_back(std::string("settled: got ") + (got.settled ? "yes" : "no") + ", reference " +
                    (want.settled ? "yes" : "no"));
        return d;
    }
    if (!got.settled) return d;

    const SettledRound& s = *got.settled;
    const Classification& c = s.classification;
    expect_eq(d, "nephew owner", s.nephew.owner.index(), want.nephewOwner);
    expect_eq(d, "nephew height", s.nephew.height, want.nephewHeight);
    expect_eq(d, "uncle count", c.uncle_count(), static_cast<int>(want.uncles.size()));
    for (std::size_t i = 0; i < std::min(c.uncles.size(), want.uncles.size()); ++i) {
        const auto& u = c.uncles[i];
        const auto& w = want.uncles[i];
        if (u.owner.index() != w.owner || u.height != w.height || u.distance != w.distance)
            d.push_back("uncle " + std::to_string(i) + ": got (" + pool_name(u.owner.index()) + ", h" +
                        std::to_string(u.height) + ", d" + std::to_string(u.distance) + "), reference (" +
                        pool_name(w.owner) + ", h" + std::to_string(w.height) + ", d" + std::to_string(w.distance) +
                        ")");
    }
    expect_eq(d, "observed", c.observed_count(), want.observed);
    expect_eq(d, "regular", c.regularCount, want.regular);
    expect_eq(d, "stale", c.staleCount, want.stale);

    const std::pair<const char*, std::pair<const Rational*, const RefFraction*>> ratios[] = {
        {"c_Q", {&s.ratios.chainQuality, &want.cQ}},  {"r_M", {&s.ratios.mainChainRatio, &want.rM}},
        {"r_O", {&s.ratios.orphanRatio, &want.rO}},   {"r_U", {&s.ratios.uncleRatio, &want.rU}},
        {"r_S", {&s.ratios.staleRatio, &want.rS}},
    };
    for (const auto& [name, pr] : ratios)
        if (!same(*pr.first, *pr.second))
            d.push_back(std::string(name) + ": got " + pr.first->str() + ", reference " + fmt(*pr.second));

    for (std::size_t p = 0; p < want.rewards.size() && p < s.rewards.perPool.size(); ++p) {
        const PoolReward& r = s.rewards.perPool[p];
        const RefReward& w = want.rewards[p];
        const std::string pool = pool_name(static_cast<int>(p));
        if (r.regular != Rational(w.regular, 32)) d.push_back(pool + " regular reward " + r.regular.str());
        if (r.uncle != Rational(w.uncle, 32)) d.push_back(pool + " uncle reward " + r.uncle.str());
        if (r.nephew != Rational(w.nephew, 32)) d.push_back(pool + " nephew reward " + r.nephew.str());
    }
    return d;
}

std::vector<std::string> check_invariants(const SettledRound& s, int prevUncleCount, int leadThreshold) {
    std::vector<std::string> d;
    const RoundOutcome& o = s.outcome;
    const Classification& c = s.classification;
    const RoundRatios& q = s.ratios;

    if (!(o.duration > 0.0)) d.push_back("non-positive duration");

    const PoolId first = o.tree.first_forked();
    if (!first.honest()) {
        const int k = o.tree.chain(first).forkPosition;
        if (k != 0 && k != 1) d.push_back("first fork at k=" + std::to_string(k));
    }
    for (const SubChain& ch : o.tree.chains())
        if (ch.forked && !ch.owner.honest() && ch.forkPosition > o.v) d.push_back("fork beyond honest tip");

    if (!o.winner.honest() && o.stats(o.winner).k + o.phi < o.omega2 + leadThreshold)
        d.push_back("dishonest release below omega2 + lead threshold");
    if (o.winner.honest() && (o.phi != 0 || o.reserved != 0)) d.push_back("honest win with release bookkeeping");

    if (c.regularCount != o.pegged_length()) d.push_back("regular count differs from pegged length");
    if (c.regularCount + c.orphanCount != static_cast<int>(c.labels.size())) d.push_back("labels do not cover blocks");
    if (c.staleCount != c.orphanCount - c.uncle_count()) d.push_back("stale != orphan - N_U");
    bool honestUncle = false;
    int honestUncleHeight = 0;
    for (const auto& u : c.uncles) {
        if (u.distance < 1 || u.distance > kMaxUncleDistance) d.push_back("uncle distance outside 1..6");
        if (u.reward != Rational(8 - u.distance, 8)) d.push_back("uncle reward off Table");
        if (u.owner.honest()) {
            honestUncle = true;
            honestUncleHeight = u.height;
        }
    }
    if (honestUncle)
        for (const auto& u : c.uncles)
            if (!u.owner.honest() && u.height - 1 >= honestUncleHeight)
                d.push_back("honest uncle coexists with a later-forked dishonest uncle");

    if (q.mainChainRatio + q.orphanRatio != Rational(1)) d.push_back("r_M + r_O != 1");
    if (q.orphanRatio != q.uncleRatio + q.staleRatio) d.push_back("r_O != r_U + r_S");
    if (o.winner.honest() && q.chainQuality != Rational(1)) d.push_back("c_Q != 1 on honest win");

    const RewardVector& rv = s.rewards;
    Rational regular, uncle, nephew;
    for (const PoolReward& p : rv.perPool) {
        if (p.regular < Rational(0) || p.uncle < Rational(0) || p.nephew < Rational(0))
            d.push_back("negative reward component");
        regular += p.regular;
        uncle += p.uncle;
        nephew += p.nephew;
    }
    Rational uncleExpected;
    for (const auto& u : c.uncles) uncleExpected += u.reward;
    if (regular != Rational(o.pegged_length())) d.push_back("regular rewards != pegged blocks");
    if (uncle != uncleExpected) d.push_back("uncle rewards != sum of (8-d)/8");
    const Rational nephewExpected = s.index > 1 ? nephew_reward(prevUncleCount) : Rational(0);
    if (nephew != nephewExpected) d.push_back("nephew reward != N_U/32 of the previous round");
    return d;
}

void check_script(const std::vector<PoolId>& events, const SimConfig& config, const CheckOptions& options,
                  Report& report) {
    ++report.scriptsChecked;
    auto record = [&](int round, std::string what) {
        if (report.violations.size() < options.maxViolations)
            report.violations.push_back({script_to_string(events), round, std::move(what)});
        else if (report.violations.size() == options.maxViolations)
            report.violations.push_back({"", 0, "further violations suppressed"});
    };

    std::vector<int> ints;
    ints.reserve(events.size());
    for (const PoolId p : events) ints.push_back(p.index());
    std::optional<RefCarry> refCarry;
    if (options.carryover) refCarry = RefCarry{options.carryover->owner.index(), options.carryover->privateBlocks};
    const std::vector<RefRound> want = reference_play(ints, RefRules::from(config), refCarry);

    std::vector<ReplayRound> got;
    try {
        got = replay_script({events, options.carryover}, config, options.pipeline);
    } catch (const Error& e) {
        if (e.code() == Errc::Incomplete && want.empty()) {
            ++report.scriptsIncomplete;
            return;
        }
        record(0, e.what());
        return;
    } catch (const std::exception& e) {
        record(0, e.what());
        return;
    }

    if (got.size() != want.size()) {
        record(0, "closed rounds: got " + std::to_string(got.size()) + ", reference " + std::to_string(want.size()));
        return;
    }
    int prevUncleCount = 0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        const int round = static_cast<int>(i) + 1;
        ++report.roundsChecked;
        for (auto& what : compare(got[i], want[i])) record(round, std::move(what));
        if (got[i].settled) {
            for (auto& what : check_invariants(*got[i].settled, prevUncleCount, config.leadThreshold))
                record(round, std::move(what));
            prevUncleCount = got[i].settled->classification.uncle_count();
        }
    }
}

Report enumerate_and_check(int maxEvents, const SimConfig& config, const CheckOptions& options) {
    Report report;
    const int pools = config.m() + 1;
    std::vector<int> digits(static_cast<std::size_t>(std::max(0, maxEvents)), 0);
    std::vector<PoolId> events(digits.size());
    for (;;) {
        for (std::size_t i = 0; i < digits.size(); ++i) events[i] = PoolId(digits[i]);
        check_script(events, config, options, report);
        // Odometer increment, last position fastest.
        std::size_t pos = digits.size();
        while (pos > 0) {
            --pos;
            if (++digits[pos] < pools) break;
            digits[pos] = 0;
            if (pos == 0) return report;
        }
        if (digits.empty()) return report;
    }
}

std::string Report::to_json() const {
    nlohmann::ordered_json j;
    j["scriptsChecked"] = scriptsChecked;
    j["scriptsIncomplete"] = scriptsIncomplete;
    j["roundsChecked"] = roundsChecked;
    j["ok"] = ok();
    auto& arr = j["violations"] = nlohmann::ordered_json::array();
    for (const auto& v : violations) arr.push_back({{"script", v.script}, {"round", v.round}, {"what", v.what}});
    return j.dump(2);
}

}  // namespace forkrace::oracle
