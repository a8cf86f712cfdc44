#pragma once

// Monte Carlo ensembles of the rewiring process, for comparison with the
// master equation and the stationary laws.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "opnet/degree_master.hpp"
#include "opnet/graph.hpp"
#include "opnet/random.hpp"

namespace opnet {

struct DegreeStudyConfig {
    std::size_t n = 200;
    double gamma = 4.0;
    double alpha = 0.01;
    double d_rate = 1.0;
    std::size_t runs = 500;
    InitMode init = InitMode::uniform_degree;
    EdgePolicy edge_policy = EdgePolicy::pseudograph;
    std::uint64_t seed = 20160914;
    std::vector<double> snapshot_times; ///< absolute times, non-decreasing
    double stationary_time = 0.0;       ///< 0 disables the stationary histogram
    std::size_t stationary_samples = 1; ///< histograms averaged per run after stationary_time
    double sample_interval = 0.0;       ///< spacing of those samples
    double master_dt = 0.0;             ///< 0 selects master_stable_dt
    std::size_t window_lo = 2;
    std::size_t window_hi = 40;

    std::size_t n_edges() const { return edge_count_for(n, gamma); }

    MasterParams master_params() const { return MasterParams{d_rate, n_edges(), n, alpha}; }

    void validate() const {
        if (n < 2) throw std::invalid_argument("degree study needs n >= 2");
        n_edges();
        RewireParams{alpha, d_rate}.validate();
        if (runs == 0) throw std::invalid_argument("runs must be positive");
        double prev = 0.0;
        for (double t : snapshot_times) {
            if (!(t >= prev)) throw std::invalid_argument("snapshot_times must be non-decreasing and >= 0");
            prev = t;
        }
        if (!(stationary_time >= 0.0)) throw std::invalid_argument("stationary_time must be >= 0");
        if (stationary_time > 0.0 && stationary_time < prev)
            throw std::invalid_argument("stationary_time must not precede the last snapshot");
        if (stationary_samples == 0) throw std::invalid_argument("stationary_samples must be positive");
        if (stationary_samples > 1 && !(sample_interval > 0.0))
            throw std::invalid_argument("sample_interval must be positive when stationary_samples > 1");
        if (!(master_dt >= 0.0)) throw std::invalid_argument("master_dt must be >= 0");
        if (window_lo < 1 || window_hi <= window_lo) throw std::invalid_argument("window must satisfy 1 <= lo < hi");
    }

    friend bool operator==(const DegreeStudyConfig&, const DegreeStudyConfig&) = default;
};

struct EnsembleResult {
    std::vector<DegreeDistribution> at_snapshots;
    std::optional<DegreeDistribution> stationary;
    std::uint64_t events = 0;
    std::uint64_t restored = 0;
};

/// Run `runs` independent graphs and average their degree histograms at
/// each snapshot time, plus (optionally) a stationary histogram averaged
/// over `stationary_samples` times starting at stationary_time.
inline EnsembleResult degree_ensemble(const DegreeStudyConfig& cfg) {
    cfg.validate();
    const std::size_t e = degree_bound(cfg.edge_policy, cfg.n_edges());
    const RewireParams rp{cfg.alpha, cfg.d_rate};
    EnsembleResult res;
    res.at_snapshots.assign(cfg.snapshot_times.size(), DegreeDistribution{std::vector<double>(e + 1, 0.0)});
    if (cfg.stationary_time > 0.0) res.stationary = DegreeDistribution{std::vector<double>(e + 1, 0.0)};

    auto accumulate = [&](DegreeDistribution& acc, const Network& net) {
        for (int c : net.degrees()) acc.probs[static_cast<std::size_t>(c)] += 1.0;
    };
    auto advance = [&](Network& net, double& t, double target, Rng& rng) {
        if (target > t) {
            const auto st = evolve_network(net, rp, target - t, rng);
            res.events += st.steps;
            res.restored += st.restored;
            t = target;
        }
    };

    for (std::size_t r = 0; r < cfg.runs; ++r) {
        Rng init_rng(stream_seed(cfg.seed, 2 * r));
        Rng rng(stream_seed(cfg.seed, 2 * r + 1));
        Network net = init_network(cfg.n, cfg.gamma, cfg.init, init_rng, cfg.edge_policy);
        double t = 0.0;
        for (std::size_t s = 0; s < cfg.snapshot_times.size(); ++s) {
            advance(net, t, cfg.snapshot_times[s], rng);
            accumulate(res.at_snapshots[s], net);
        }
        if (res.stationary) {
            for (std::size_t k = 0; k < cfg.stationary_samples; ++k) {
                advance(net, t, cfg.stationary_time + static_cast<double>(k) * cfg.sample_interval, rng);
                accumulate(*res.stationary, net);
            }
        }
    }

    auto normalise = [](DegreeDistribution& d) {
        const double s = d.total();
        for (double& v : d.probs) v /= s;
    };
    for (auto& d : res.at_snapshots) normalise(d);
    if (res.stationary) normalise(*res.stationary);
    return res;
}

} // namespace opnet
