#include "forkrace/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "forkrace/error.hpp"
#include "forkrace/metrics.hpp"
#include "forkrace/rng.hpp"
#include "forkrace/simulation.hpp"

namespace forkrace {

using Json = nlohmann::ordered_json;

std::string to_string(ExperimentMode mode) {
    switch (mode) {
        case ExperimentMode::Single: return "single";
        case ExperimentMode::Sweep: return "sweep";
        case ExperimentMode::Threshold: return "threshold";
    }
    return "single";
}

std::vector<SimConfig> ExperimentSpec::grid_configs() const {
    if (mode == ExperimentMode::Single) return {base};
    std::vector<SimConfig> out;
    out.reserve(grid.size());
    for (double a : grid) out.push_back(with_honest_alpha(base, a));
    return out;
}

int ExperimentSpec::effective_workers() const {
    if (workers > 0) return workers;
    return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
    throw Error(Errc::ConfigError, field + ": " + what);
}

double number_at(const Json& j, const std::string& field) {
    if (!j.is_number()) config_error(field, "expected a number");
    return j.get<double>();
}

std::int64_t integer_at(const Json& j, const std::string& field) {
    if (!j.is_number_integer()) config_error(field, "expected an integer");
    return j.get<std::int64_t>();
}

std::vector<double> numbers_at(const Json& j, const std::string& field) {
    if (!j.is_array()) config_error(field, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number_at(j[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<double> parse_grid(const Json& j) {
    if (j.is_array()) return numbers_at(j, "grid");
    if (!j.is_object()) config_error("grid", "expected an array or {from, to, step}");
    for (const auto& [key, _] : j.items())
        if (key != "from" && key != "to" && key != "step") config_error("grid." + key, "unknown key");
    if (!j.contains("from") || !j.contains("to") || !j.contains("step"))
        config_error("grid", "range needs from, to and step");
    const double from = number_at(j["from"], "grid.from");
    const double to = number_at(j["to"], "grid.to");
    const double step = number_at(j["step"], "grid.step");
    if (!(step > 0.0)) config_error("grid.step", "must be positive");
    if (to < from) config_error("grid.to", "must not be below grid.from");
    std::vector<double> out;
    const auto count = static_cast<long>(std::floor((to - from) / step + 1e-9));
    // Rounded to 12 decimals so 0.55 + 5 * 0.05 prints as 0.8.
    for (long i = 0; i <= count; ++i) out.push_back(std::round((from + step * static_cast<double>(i)) * 1e12) / 1e12);
    return out;
}

std::vector<double> default_grid() { return {0.55, 0.60, 0.65, 0.70, 0.75, 0.80}; }

ExperimentMode parse_mode(const std::string& s, const std::string& field) {
    if (s == "single") return ExperimentMode::Single;
    if (s == "sweep") return ExperimentMode::Sweep;
    if (s == "threshold") return ExperimentMode::Threshold;
    config_error(field, "expected single, sweep or threshold, got '" + s + "'");
}

void check_alphas(const std::vector<double>& alphas) {
    if (alphas.size() < 2) config_error("alphas", "need the honest pool and at least one dishonest pool");
    double sum = 0.0;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        const std::string field = "alphas[" + std::to_string(i) + "]";
        if (!std::isfinite(alphas[i])) config_error(field, "not a finite number");
        if (alphas[i] < 0.0) config_error(field, "negative mining power " + std::to_string(alphas[i]));
        if (alphas[i] > 1.0) config_error(field, "mining power above 1");
        sum += alphas[i];
    }
    if (sum > 1.0 + 1e-9) {
        std::ostringstream os;
        os << "mining powers sum to " << sum << " > 1";
        config_error("alphas", os.str());
    }
    if (sum <= 0.0) config_error("alphas", "every mining power is zero");
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "mode",   "alphas",  "gamma",   "meanBlockTime", "leadThreshold", "dishonestStopLead", "releasePolicy",
        "rounds", "replications", "seed", "out",         "workers",       "emitRounds",        "roundsCap",
        "grid"};
    return keys;
}

ExperimentSpec build_spec(const Json& doc, const ConfigOverrides& ov) {
    if (!doc.is_object()) config_error("<document>", "expected a JSON object");
    for (const auto& [key, _] : doc.items())
        if (!known_keys().count(key)) config_error(key, "unknown key");

    ExperimentSpec spec;
    SimConfig& c = spec.base;
    std::optional<std::vector<double>> alphas;
    if (doc.contains("mode")) {
        if (!doc["mode"].is_string()) config_error("mode", "expected a string");
        spec.mode = parse_mode(doc["mode"].get<std::string>(), "mode");
    }
    if (doc.contains("alphas")) alphas = numbers_at(doc["alphas"], "alphas");
    if (doc.contains("gamma")) c.gamma = number_at(doc["gamma"], "gamma");
    if (doc.contains("meanBlockTime")) c.meanBlockTime = number_at(doc["meanBlockTime"], "meanBlockTime");
    if (doc.contains("leadThreshold")) {
        c.leadThreshold = static_cast<int>(integer_at(doc["leadThreshold"], "leadThreshold"));
        c.dishonestStopLead = c.leadThreshold;
    }
    if (doc.contains("dishonestStopLead"))
        c.dishonestStopLead = static_cast<int>(integer_at(doc["dishonestStopLead"], "dishonestStopLead"));
    if (doc.contains("releasePolicy")) {
        const Json& p = doc["releasePolicy"];
        if (!p.is_string()) config_error("releasePolicy", "expected \"all\" or \"min\"");
        const auto s = p.get<std::string>();
        if (s == "all") c.releasePolicy = ReleasePolicy::ReleaseAll;
        else if (s == "min") c.releasePolicy = ReleasePolicy::ReleaseMin;
        else config_error("releasePolicy", "expected \"all\" or \"min\", got '" + s + "'");
    }
    if (doc.contains("rounds")) spec.rounds = integer_at(doc["rounds"], "rounds");
    if (doc.contains("replications"))
        spec.replications = static_cast<int>(integer_at(doc["replications"], "replications"));
    if (doc.contains("seed")) {
        const Json& s = doc["seed"];
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0))
            config_error("seed", "expected a non-negative integer");
        spec.masterSeed = s.get<std::uint64_t>();
    }
    if (doc.contains("out")) {
        if (!doc["out"].is_string()) config_error("out", "expected a path string");
        spec.outDir = doc["out"].get<std::string>();
    }
    if (doc.contains("workers")) spec.workers = static_cast<int>(integer_at(doc["workers"], "workers"));
    if (doc.contains("emitRounds")) {
        if (!doc["emitRounds"].is_boolean()) config_error("emitRounds", "expected true or false");
        spec.emitRounds = doc["emitRounds"].get<bool>();
    }
    if (doc.contains("roundsCap")) spec.roundsCap = integer_at(doc["roundsCap"], "roundsCap");
    std::optional<std::vector<double>> grid;
    if (doc.contains("grid")) grid = parse_grid(doc["grid"]);

    if (ov.mode) spec.mode = parse_mode(*ov.mode, "--mode");
    if (ov.alphas) alphas = ov.alphas;
    if (ov.grid) grid = ov.grid;
    if (ov.rounds) spec.rounds = *ov.rounds;
    if (ov.replications) spec.replications = *ov.replications;
    if (ov.seed) spec.masterSeed = *ov.seed;
    if (ov.outDir) spec.outDir = *ov.outDir;
    if (ov.workers) spec.workers = *ov.workers;
    if (ov.emitRounds) spec.emitRounds = *ov.emitRounds;
    if (const char* env = std::getenv("SIM_WORKERS"); env && *env) {
        char* end = nullptr;
        const long w = std::strtol(env, &end, 10);
        if (*end != '\0' || w < 0) config_error("SIM_WORKERS", "expected a non-negative integer");
        spec.workers = static_cast<int>(w);
    }

    if (!alphas) config_error("alphas", "required (honest pool first)");
    check_alphas(*alphas);
    const double gamma = c.gamma;
    SimConfig built = SimConfig::from_alphas(*alphas, gamma);
    built.meanBlockTime = c.meanBlockTime;
    built.leadThreshold = c.leadThreshold;
    built.dishonestStopLead = c.dishonestStopLead;
    built.releasePolicy = c.releasePolicy;
    spec.base = built;
    try {
        spec.base.validate();
    } catch (const Error& e) {
        throw Error(Errc::ConfigError, e.what());
    }

    if (spec.rounds < 1) config_error("rounds", "must be at least 1");
    if (spec.replications < 1) config_error("replications", "must be at least 1");
    if (spec.workers < 0) config_error("workers", "must be non-negative");
    if (spec.roundsCap < 0) config_error("roundsCap", "must be non-negative");

    if (spec.mode != ExperimentMode::Single) {
        spec.grid = grid ? *grid : default_grid();
        if (spec.grid.empty()) config_error("grid", "needs at least one value");
        if (spec.mode == ExperimentMode::Threshold && spec.grid.size() < 2)
            config_error("grid", "threshold search needs at least two values");
        for (std::size_t g = 0; g < spec.grid.size(); ++g) {
            const std::string field = "grid[" + std::to_string(g) + "]";
            if (!(spec.grid[g] > 0.0 && spec.grid[g] <= 1.0)) config_error(field, "alpha_H must lie in (0, 1]");
            try {
                with_honest_alpha(spec.base, spec.grid[g]).validate();
            } catch (const Error& e) {
                config_error(field, e.what());
            }
        }
    } else {
        spec.grid = {spec.base.pools[0].alpha};
    }
    return spec;
}

}  // namespace

ExperimentSpec parse_config_text(const std::string& text, const ConfigOverrides& overrides) {
    Json doc;
    try {
        doc = text.empty() ? Json::object() : Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw Error(Errc::ConfigError, std::string("<document>: ") + e.what());
    }
    return build_spec(doc, overrides);
}

ExperimentSpec parse_config(const std::optional<std::string>& path, const ConfigOverrides& overrides) {
    if (!path) return parse_config_text("", overrides);
    std::ifstream in(*path);
    if (!in) throw Error(Errc::ConfigError, "--config: cannot read " + *path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), overrides);
}

std::vector<std::string> gridpoint_columns(int m, bool threshold) {
    std::vector<std::string> cols{"alphaH", "alphaList", "gamma", "rounds", "replication", "seed", "pH"};
    for (int i = 1; i <= m; ++i) cols.push_back("p" + std::to_string(i));
    for (const char* c : {"cQ", "rM", "rO", "rU", "rS", "growthDirect", "growthDecomp", "rewardRateH_direct",
                          "rewardRateH_decomp"})
        cols.emplace_back(c);
    for (int i = 1; i <= m; ++i) {
        cols.push_back("rewardRate" + std::to_string(i) + "_direct");
        cols.push_back("rewardRate" + std::to_string(i) + "_decomp");
    }
    if (threshold)
        for (const char* c : {"alphaStar", "alphaStarLo", "alphaStarHi"}) cols.emplace_back(c);
    return cols;
}

namespace {

std::string num(double x) {
    if (std::isnan(x)) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string pool_key(int p) { return p == 0 ? "H" : "D" + std::to_string(p); }

std::string alpha_list(const SimConfig& c) {
    std::string s;
    for (std::size_t i = 0; i < c.pools.size(); ++i) {
        if (i) s += ';';
        s += num(c.pools[i].alpha);
    }
    return s;
}

// Scalars reported per (grid point, replication).
struct RunScalars {
    std::vector<double> p;  // by pool
    std::array<double, kRatioCount> ratios{};
    RateEstimate growth;
    std::vector<RateEstimate> rewardRates;
    std::vector<double> rewardMeans;
};

RunScalars scalars_of(const EstimatorBank& bank) {
    RunScalars s;
    for (int p = 0; p <= bank.m(); ++p) {
        s.p.push_back(bank.p(PoolId(p)));
        s.rewardMeans.push_back(bank.reward(PoolId(p)).mean());
    }
    s.ratios = ratio_averages(bank).direct;
    s.growth = growth_rate(bank);
    s.rewardRates = reward_rates(bank);
    return s;
}

Json ci_json(const ConfidenceInterval& ci) { return Json{{"mean", ci.mean}, {"lo", ci.lo}, {"hi", ci.hi}}; }

const char* const kRatioNames[kRatioCount] = {"cQ", "rM", "rO", "rU", "rS"};

Json bank_json(const EstimatorBank& bank) {
    const int m = bank.m();
    Json j;
    j["rounds"] = bank.rounds();
    Json p = Json::object();
    for (int i = 0; i <= m; ++i) p[pool_key(i)] = bank.p(PoolId(i));
    j["p"] = p;

    auto matrix = [&](auto&& f) {
        Json out = Json::object();
        for (int w = 0; w <= m; ++w) {
            Json row = Json::object();
            for (int h = 0; h <= m; ++h) row[pool_key(h)] = f(PoolId(w), PoolId(h));
            out[pool_key(w)] = row;
        }
        return out;
    };
    // Rows are the round winner, columns the pool holding the nephew / uncle.
    j["q"] = {
        {"nephew",
         {{"joint", matrix([&](PoolId w, PoolId h) { return bank.q_nephew_joint(w, h); })},
          {"conditional", matrix([&](PoolId w, PoolId h) { return bank.q_nephew_conditional(w, h); })},
          {"meanReward", matrix([&](PoolId w, PoolId h) { return bank.mean_nephew_reward(w, h); })}}},
        {"uncle",
         {{"joint", matrix([&](PoolId w, PoolId h) { return bank.q_uncle_joint(w, h); })},
          {"conditional", matrix([&](PoolId w, PoolId h) { return bank.q_uncle_conditional(w, h); })},
          {"meanReward", matrix([&](PoolId w, PoolId h) { return bank.mean_uncle_reward(w, h); })}}},
    };

    Json k = Json::object(), l = Json::object(), phi = Json::object();
    for (int i = 1; i <= m; ++i) {
        k[pool_key(i)] = bank.k_given_win(PoolId(i)).mean();
        l[pool_key(i)] = bank.l_given_win(PoolId(i)).mean();
        phi[pool_key(i)] = bank.phi_given_win(PoolId(i)).mean();
    }
    j["conditionalMeans"] = {{"vGivenHonestWin", bank.v_given_honest().mean()},
                             {"kGivenWin", k},
                             {"lGivenWin", l},
                             {"phiGivenWin", phi}};
    j["meanRoundDuration"] = bank.duration().mean();
    j["meanPeggedBlocks"] = bank.pegged_blocks().mean();

    const RatioAverages avg = ratio_averages(bank);
    Json direct = Json::object(), decomposed = Json::object();
    for (std::size_t i = 0; i < kRatioCount; ++i) {
        direct[kRatioNames[i]] = avg.direct[i];
        decomposed[kRatioNames[i]] = avg.decomposed[i];
    }
    j["ratios"] = {{"direct", direct}, {"decomposed", decomposed}};

    const RateEstimate g = growth_rate(bank);
    j["growthRate"] = {{"direct", g.direct}, {"decomposition", g.decomposition}};
    const auto rates = reward_rates(bank);
    Json means = Json::object(), rr = Json::object();
    for (int i = 0; i <= m; ++i) {
        means[pool_key(i)] = bank.reward(PoolId(i)).mean();
        rr[pool_key(i)] = {{"direct", rates[static_cast<std::size_t>(i)].direct},
                           {"decomposition", rates[static_cast<std::size_t>(i)].decomposition}};
    }
    j["rewardMeans"] = means;
    j["rewardRates"] = rr;
    return j;
}

std::string round_row(std::size_t gridIndex, std::size_t replication, const SettledRound& s, int m) {
    const RoundOutcome& o = s.outcome;
    std::ostringstream os;
    os << gridIndex << ',' << replication << ',' << s.index << ',' << pool_key(o.winner.index()) << ',' << o.v;
    for (int i = 1; i <= m; ++i) {
        const auto& st = o.stats(PoolId(i));
        os << ',' << (st.forked ? std::to_string(st.k) : std::string()) << ',' << st.l;
    }
    os << ',' << o.phi << ',' << o.reserved << ',' << num(o.duration) << ',' << o.pegged_length() << ','
       << pool_key(s.nephew.owner.index()) << ',' << s.nephew.height << ',' << s.classification.uncle_count();
    os << ',' << s.ratios.chainQuality << ',' << s.ratios.mainChainRatio << ',' << s.ratios.orphanRatio << ','
       << s.ratios.uncleRatio << ',' << s.ratios.staleRatio;
    for (int p = 0; p <= m; ++p) os << ',' << s.rewards.perPool[static_cast<std::size_t>(p)].total();
    os << '\n';
    return os.str();
}

std::string rounds_header(int m) {
    std::string h = "gridIndex,replication,round,winner,v";
    for (int i = 1; i <= m; ++i) h += ",k" + std::to_string(i) + ",l" + std::to_string(i);
    h += ",phi,reserved,duration,pegged,nephewOwner,nephewHeight,uncles,cQ,rM,rO,rU,rS,rewardH";
    for (int i = 1; i <= m; ++i) h += ",reward" + std::to_string(i);
    return h + "\n";
}

struct JobOutput {
    EstimatorBank bank;
    std::vector<std::string> rounds;
};

}  // namespace

ExperimentResult execute(const ExperimentSpec& spec) {
    const auto started = std::chrono::steady_clock::now();
    const std::vector<SimConfig> configs = spec.grid_configs();
    const std::size_t G = configs.size();
    const auto R = static_cast<std::size_t>(spec.replications);
    const int m = spec.base.m();
    const bool threshold = spec.mode == ExperimentMode::Threshold;

    std::vector<JobOutput> jobs(G * R);
    parallel_for(G * R, spec.effective_workers(), [&](std::size_t job) {
        const std::size_t g = job / R;
        const std::size_t r = job % R;
        JobOutput& out = jobs[job];
        RoundObserver observer;
        if (spec.emitRounds)
            observer = [&](const SettledRound& s) {
                if (static_cast<std::int64_t>(out.rounds.size()) < spec.roundsCap)
                    out.rounds.push_back(round_row(g, r, s, m));
            };
        out.bank = simulate(configs[g], spec.rounds, child_seed(spec.masterSeed, g, r), observer);
    });

    std::vector<std::vector<RunScalars>> scalars(G);
    for (std::size_t job = 0; job < jobs.size(); ++job) scalars[job / R].push_back(scalars_of(jobs[job].bank));

    std::optional<ThresholdEstimate> crossing;
    std::string crossingError;
    if (threshold) {
        std::vector<std::vector<double>> pH(G), p1(G);
        for (std::size_t g = 0; g < G; ++g)
            for (const RunScalars& s : scalars[g]) {
                pH[g].push_back(s.p[0]);
                p1[g].push_back(s.p[1]);
            }
        try {
            crossing = locate_crossing(spec.grid, pH, p1);
        } catch (const Error& e) {
            if (e.code() != Errc::NoCrossing) throw;
            crossingError = e.what();
        }
    }

    ExperimentResult result;

    // gridpoint.csv
    {
        std::ostringstream csv;
        const auto cols = gridpoint_columns(m, threshold);
        for (std::size_t i = 0; i < cols.size(); ++i) csv << (i ? "," : "") << cols[i];
        csv << "\n";
        for (std::size_t g = 0; g < G; ++g)
            for (std::size_t r = 0; r < R; ++r) {
                const RunScalars& s = scalars[g][r];
                csv << num(configs[g].pools[0].alpha) << ',' << alpha_list(configs[g]) << ','
                    << num(configs[g].gamma) << ',' << spec.rounds << ',' << r << ','
                    << child_seed(spec.masterSeed, g, r);
                for (double p : s.p) csv << ',' << num(p);
                for (double x : s.ratios) csv << ',' << num(x);
                csv << ',' << num(s.growth.direct) << ',' << num(s.growth.decomposition);
                for (const RateEstimate& rr : s.rewardRates) csv << ',' << num(rr.direct) << ',' << num(rr.decomposition);
                if (threshold) {
                    if (crossing)
                        csv << ',' << num(crossing->alphaStar) << ',' << num(crossing->ci.lo) << ','
                            << num(crossing->ci.hi);
                    else
                        csv << ",,,";
                }
                csv << "\n";
            }
        result.gridpointCsv = csv.str();
    }

    if (spec.emitRounds) {
        std::string rows = rounds_header(m);
        std::int64_t written = 0;
        for (const JobOutput& j : jobs)
            for (const std::string& row : j.rounds) {
                if (written++ >= spec.roundsCap) break;
                rows += row;
            }
        result.roundsCsv = std::move(rows);
    }

    // summary.json
    Json summary;
    summary["mode"] = to_string(spec.mode);
    summary["masterSeed"] = spec.masterSeed;
    summary["rounds"] = spec.rounds;
    summary["replications"] = spec.replications;
    summary["config"] = {
        {"alphas", spec.base.alphas()},
        {"gamma", spec.base.gamma},
        {"meanBlockTime", spec.base.meanBlockTime},
        {"leadThreshold", spec.base.leadThreshold},
        {"dishonestStopLead", spec.base.dishonestStopLead},
        {"releasePolicy", spec.base.releasePolicy == ReleasePolicy::ReleaseAll ? "all" : "min"},
        {"grid", spec.grid},
    };

    Json points = Json::array();
    for (std::size_t g = 0; g < G; ++g) {
        Json pt;
        pt["index"] = g;
        pt["alphaH"] = configs[g].pools[0].alpha;
        pt["alphas"] = configs[g].alphas();
        Json seeds = Json::array();
        for (std::size_t r = 0; r < R; ++r) seeds.push_back(child_seed(spec.masterSeed, g, r));
        pt["seeds"] = seeds;

        EstimatorBank pooled(m);
        for (std::size_t r = 0; r < R; ++r) pooled.merge(jobs[g * R + r].bank);
        pt["pooled"] = bank_json(pooled);

        // Replication-based 95% intervals (normal approximation).
        auto across = [&](auto&& f) {
            std::vector<double> xs;
            for (const RunScalars& s : scalars[g]) xs.push_back(f(s));
            return ci_json(ci95(xs));
        };
        Json ci;
        for (int p = 0; p <= m; ++p)
            ci["p" + (p == 0 ? std::string("H") : std::to_string(p))] =
                across([p](const RunScalars& s) { return s.p[static_cast<std::size_t>(p)]; });
        for (std::size_t i = 0; i < kRatioCount; ++i)
            ci[kRatioNames[i]] = across([i](const RunScalars& s) { return s.ratios[i]; });
        ci["growthDirect"] = across([](const RunScalars& s) { return s.growth.direct; });
        ci["growthDecomp"] = across([](const RunScalars& s) { return s.growth.decomposition; });
        for (int p = 0; p <= m; ++p) {
            const auto pi = static_cast<std::size_t>(p);
            const std::string name = p == 0 ? "H" : std::to_string(p);
            ci["rewardMean" + name] = across([pi](const RunScalars& s) { return s.rewardMeans[pi]; });
            ci["rewardRate" + name + "_direct"] = across([pi](const RunScalars& s) { return s.rewardRates[pi].direct; });
            ci["rewardRate" + name + "_decomp"] =
                across([pi](const RunScalars& s) { return s.rewardRates[pi].decomposition; });
        }
        pt["ci95"] = ci;
        points.push_back(pt);
    }
    summary["gridPoints"] = points;

    if (threshold) {
        Json t;
        if (crossing) {
            t["found"] = true;
            t["alphaStar"] = crossing->alphaStar;
            t["ci95"] = ci_json(crossing->ci);
            double rest = 0.0;
            for (std::size_t j = 2; j < spec.base.pools.size(); ++j) rest += spec.base.pools[j].alpha;
            t["dishonestThreshold"] = 1.0 - crossing->alphaStar - rest;
            t["bracket"] = {spec.grid[crossing->bracketLo], spec.grid[crossing->bracketHi]};
            t["meanHonest"] = crossing->meanHonest;
            t["meanDishonest"] = crossing->meanDishonest;
        } else {
            t["found"] = false;
            t["reason"] = crossingError;
        }
        summary["threshold"] = t;
    }

    result.wallClockSeconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    summary["wallClockSeconds"] = result.wallClockSeconds;
    result.summaryJson = summary.dump(2) + "\n";
    return result;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(spec.outDir, ec);
    if (ec || !fs::is_directory(spec.outDir))
        throw Error(Errc::IoError, "cannot create output directory " + spec.outDir);

    ExperimentResult result = execute(spec);
    auto write = [&](const std::string& name, const std::string& body) {
        const fs::path path = fs::path(spec.outDir) / name;
        std::ofstream out(path, std::ios::binary);
        out << body;
        out.close();
        if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
    };
    write("summary.json", result.summaryJson);
    write("gridpoint.csv", result.gridpointCsv);
    if (spec.emitRounds) write("rounds.csv", result.roundsCsv);
    return result;
}

}  // namespace forkrace
