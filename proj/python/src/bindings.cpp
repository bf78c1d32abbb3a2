#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "forkrace/error.hpp"
#include "forkrace/experiment.hpp"
#include "forkrace/metrics.hpp"
#include "forkrace/oracle.hpp"
#include "forkrace/simulation.hpp"
#include "forkrace/uncle_classifier.hpp"

namespace py = pybind11;
using namespace forkrace;

namespace {

py::object fraction(const Rational& r) {
    static py::object cls = py::module_::import("fractions").attr("Fraction");
    return cls(r.num(), r.den());
}

SimConfig make_config(const std::vector<double>& alphas, double gamma, int leadThreshold, int stopLead,
                      const std::string& release) {
    SimConfig c = SimConfig::from_alphas(alphas, gamma);
    c.leadThreshold = leadThreshold;
    c.dishonestStopLead = stopLead;
    if (release == "all")
        c.releasePolicy = ReleasePolicy::ReleaseAll;
    else if (release == "min")
        c.releasePolicy = ReleasePolicy::ReleaseMin;
    else
        throw Error(Errc::InvalidConfig, "release: expected 'all' or 'min'");
    c.validate();
    return c;
}

std::vector<PoolId> parse_script(const std::vector<int>& events) {
    std::vector<PoolId> out;
    out.reserve(events.size());
    for (int e : events) out.push_back(PoolId(e));
    return out;
}

py::dict round_dict(const ReplayRound& r) {
    const RoundOutcome& o = r.outcome;
    py::dict d;
    d["winner"] = o.winner.index();
    d["v"] = o.v;
    d["phi"] = o.phi;
    d["reserved"] = o.reserved;
    d["pegged"] = o.pegged_length();
    d["first_block_owner"] = o.firstBlockOwner.index();
    py::list forks;
    for (const PoolRoundStats& s : o.perPool) forks.append(py::make_tuple(s.forked, s.k, s.l));
    d["pools"] = forks;
    d["settled"] = r.settled.has_value();
    if (r.settled) {
        const Classification& c = r.settled->classification;
        d["nephew"] = py::make_tuple(c.nephew->owner.index(), c.nephew->height);
        py::list uncles;
        for (const UnclePayment& u : c.uncles)
            uncles.append(py::make_tuple(u.owner.index(), u.height, u.distance, fraction(u.reward)));
        d["uncles"] = uncles;
        py::list rewards;
        for (const PoolReward& p : r.settled->rewards.perPool)
            rewards.append(py::make_tuple(fraction(p.regular), fraction(p.uncle), fraction(p.nephew)));
        d["rewards"] = rewards;
        const RoundRatios& q = r.settled->ratios;
        d["ratios"] = py::dict(py::arg("cQ") = fraction(q.chainQuality), py::arg("rM") = fraction(q.mainChainRatio),
                               py::arg("rO") = fraction(q.orphanRatio), py::arg("rU") = fraction(q.uncleRatio),
                               py::arg("rS") = fraction(q.staleRatio));
    }
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Native core of the forkrace simulator";

    // Instances carry the library's error code name in `.code`.
    static PyObject* excType = py::exception<Error>(m, "ForkraceError").release().ptr();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object err = py::reinterpret_borrow<py::object>(excType)(e.what());
            err.attr("code") = std::string(to_string(e.code()));
            PyErr_SetObject(excType, err.ptr());
        }
    });

    m.def("uncle_reward", [](int d) { return fraction(uncle_reward(d)); }, py::arg("distance"));
    m.def("nephew_reward", [](int n) { return fraction(nephew_reward(n)); }, py::arg("uncle_count"));

    m.def(
        "run_config",
        [](const std::string& text) {
            std::string summary;
            {
                py::gil_scoped_release release;
                summary = execute(parse_config_text(text)).summaryJson;
            }
            return summary;
        },
        py::arg("config_json"), "Runs an experiment described by a JSON config and returns summary JSON text.");

    m.def(
        "replay",
        [](const std::vector<int>& events, const std::vector<double>& alphas, double gamma, int leadThreshold,
           int stopLead, const std::string& release, std::optional<std::pair<int, int>> carry) {
            EventScript s{parse_script(events), std::nullopt};
            if (carry) s.carryover = Carryover{PoolId(carry->first), carry->second, true};
            py::list out;
            for (const ReplayRound& r :
                 replay_script(s, make_config(alphas, gamma, leadThreshold, stopLead, release)))
                out.append(round_dict(r));
            return out;
        },
        py::arg("events"), py::arg("alphas"), py::arg("gamma") = 10.0, py::arg("lead_threshold") = 2,
        py::arg("dishonest_stop_lead") = 2, py::arg("release") = "all", py::arg("carry") = py::none());

    m.def(
        "check_exhaustive",
        [](int maxEvents, int pools, int stopLead, const std::string& release, int uncleCutoff) {
            std::vector<double> alphas(static_cast<std::size_t>(pools) + 1, 1.0 / (pools + 1));
            oracle::CheckOptions options;
            options.pipeline.maxUncleDistance = uncleCutoff;
            const SimConfig c = make_config(alphas, 10.0, 2, stopLead, release);
            py::gil_scoped_release unlock;
            return oracle::enumerate_and_check(maxEvents, c, options).to_json();
        },
        py::arg("max_events"), py::arg("m") = 2, py::arg("dishonest_stop_lead") = 2, py::arg("release") = "all",
        py::arg("uncle_cutoff") = kMaxUncleDistance, "Oracle report as JSON text.");

    m.def(
        "power_threshold",
        [](const std::vector<double>& alphas, const std::vector<double>& grid, int replications,
           std::int64_t rounds, std::uint64_t seed, int workers, double gamma) {
            const SimConfig base = make_config(alphas, gamma, 2, 2, "all");
            ThresholdEstimate t;
            {
                py::gil_scoped_release unlock;
                t = find_power_threshold(base, grid, replications, rounds, seed, workers);
            }
            py::dict d;
            d["alpha_star"] = t.alphaStar;
            d["ci95"] = py::make_tuple(t.ci.lo, t.ci.hi);
            d["bracket"] = py::make_tuple(grid[t.bracketLo], grid[t.bracketHi]);
            d["mean_honest"] = t.meanHonest;
            d["mean_dishonest"] = t.meanDishonest;
            return d;
        },
        py::arg("alphas"), py::arg("grid"), py::arg("replications"), py::arg("rounds"), py::arg("seed") = 1,
        py::arg("workers") = 1, py::arg("gamma") = 10.0);
}
