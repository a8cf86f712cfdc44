// opnet: simulate | degree-dist | sweep
//
//   opnet simulate    --config configs/consensus.yaml --out out/sim
//   opnet degree-dist --config configs/degree_power_law.yaml --out out/dd
//   opnet sweep       --config configs/sweep.yaml --out out/sweep --c-star 10,20,30
//
// Exit codes: 0 ok, 1 usage, 2 config, 3 simulation, 4 I/O.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "opnet/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Opinion dynamics on a rewiring network with degree-selective control"};
    app.require_subcommand(1);

    opnet::CommandOptions opt;
    std::uint64_t seed = 0;
    std::vector<int> c_star;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config, "configuration file")->required();
        sub->add_option("--out", opt.out_dir, "output directory")->required();
        sub->add_option("--seed", seed, "override the configured seed");
    };
    CLI::App* simulate = app.add_subcommand("simulate", "controlled or uncontrolled opinion trajectory");
    CLI::App* degree = app.add_subcommand("degree-dist", "degree distribution: Monte Carlo vs master equation");
    CLI::App* sweep = app.add_subcommand("sweep", "final consensus as a function of the degree threshold");
    common(simulate);
    common(degree);
    common(sweep);
    sweep->add_option("--c-star", c_star, "comma separated thresholds")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? opnet::exit_ok : opnet::exit_usage;
    }

    for (CLI::App* sub : {simulate, degree, sweep})
        if (sub->count("--seed") > 0) opt.seed = seed;
    if (sweep->count("--c-star") > 0) opt.c_star = c_star;

    if (*simulate) return opnet::cmd_simulate(opt);
    if (*degree) return opnet::cmd_degree_dist(opt);
    return opnet::cmd_sweep(opt);
}
