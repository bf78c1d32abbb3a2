// Exhaustive cross-check of engine, classifier and allocator against the
// reference player. Prints a JSON violation report; exit 1 on any violation.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "forkrace/oracle.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Enumerate every event order up to a length and check it against the reference rules"};
    int maxEvents = 8;
    int m = 2;
    int stopLead = 2;
    std::string policy = "all";
    int carryOwner = 0;
    int carryBlocks = 0;
    int cutoff = 6;

    app.add_option("--max-events", maxEvents, "script length")->check(CLI::Range(0, 12));
    app.add_option("-m,--dishonest-pools", m, "number of dishonest pools")->check(CLI::Range(1, 3));
    app.add_option("--stop-lead", stopLead, "lead at which a dishonest leader ends the round")->check(CLI::Range(2, 8));
    app.add_option("--release", policy, "all | min")->check(CLI::IsMember({"all", "min"}));
    app.add_option("--carry-owner", carryOwner, "dishonest pool holding private blocks at the start");
    app.add_option("--carry-blocks", carryBlocks, "private blocks carried in");
    app.add_option("--uncle-cutoff", cutoff, "uncle distance cutoff of the implementation under test");
    CLI11_PARSE(app, argc, argv);

    auto config = forkrace::SimConfig::from_alphas(std::vector<double>(static_cast<std::size_t>(m) + 1, 1.0 / (m + 1)));
    config.dishonestStopLead = stopLead;
    config.releasePolicy =
        policy == "min" ? forkrace::ReleasePolicy::ReleaseMin : forkrace::ReleasePolicy::ReleaseAll;

    forkrace::oracle::CheckOptions options;
    options.pipeline.maxUncleDistance = cutoff;
    if (carryBlocks > 0) {
        if (carryOwner < 1 || carryOwner > m) {
            std::cerr << "--carry-owner must name a dishonest pool\n";
            return 2;
        }
        options.carryover = forkrace::Carryover{forkrace::PoolId(carryOwner), carryBlocks, true};
    }

    const auto report = forkrace::oracle::enumerate_and_check(maxEvents, config, options);
    std::cout << report.to_json() << "\n";
    return report.ok() ? 0 : 1;
}
