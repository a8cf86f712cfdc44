#pragma once

// Coupled network / control / opinion loop and the threshold sweep.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "opnet/control.hpp"
#include "opnet/graph.hpp"
#include "opnet/opinion.hpp"
#include "opnet/random.hpp"

namespace opnet {

inline constexpr std::uint64_t default_seed = 20160914;

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class OpinionInit { uniform_random, explicit_vector };

struct SimConfig {
    std::size_t n = 100;
    double gamma = 30.0;
    double alpha = 0.01;
    double d_rate = 20.0;
    double t0 = 0.0;
    double tf = 50.0;
    double dt = 5e-3;
    KernelParams kernel{};
    std::optional<ControlConfig> control; ///< absent: uncontrolled run
    std::string tableau = "euler";
    OpinionInit init_opinion = OpinionInit::uniform_random;
    double opinion_lo = -1.0;
    double opinion_hi = 1.0;
    std::vector<double> opinions; ///< used with OpinionInit::explicit_vector
    InitMode init_graph = InitMode::uniform_degree;
    EdgePolicy edge_policy = EdgePolicy::pseudograph;
    std::uint64_t seed = default_seed;
    std::vector<double> snapshot_times;

    /// Number of sampling steps; (tf - t0) must be a multiple of dt.
    std::size_t steps() const {
        const double m = (tf - t0) / dt;
        const double r = std::round(m);
        if (std::abs(m - r) > 1e-9 * std::max(1.0, r))
            throw SimulationError("dt must divide tf - t0");
        return static_cast<std::size_t>(r);
    }

    void validate() const {
        if (n < 2) throw SimulationError("n must be at least 2");
        if (!(tf > t0)) throw SimulationError("tf must exceed t0");
        if (!(dt > 0.0)) throw SimulationError("dt must be positive");
        steps();
        RewireParams{alpha, d_rate}.validate();
        kernel.validate();
        RKTableau::by_name(tableau);
        if (control) {
            ControlConfig cc = *control;
            cc.dt = dt;
            cc.validate();
        }
        if (init_opinion == OpinionInit::explicit_vector && opinions.size() != n)
            throw SimulationError("explicit opinion vector must have n entries");
        if (init_opinion == OpinionInit::uniform_random && !(opinion_lo <= opinion_hi))
            throw SimulationError("opinion interval is empty");
        for (double t : snapshot_times)
            if (!(t >= t0 && t <= tf)) throw SimulationError("snapshot time outside [t0, tf]");
    }

    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct Snapshot {
    double time = 0.0;
    Network net;
    std::vector<double> w;
};

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<std::vector<double>> opinions;
    std::vector<std::vector<int>> degrees;
    std::vector<double> control;             ///< u applied over the step ending at times[k]
    std::vector<double> consensus;           ///< V_{w_d}
    std::vector<double> controlled_fraction; ///< share of nodes with degree >= c*
    std::vector<Snapshot> snapshots;
    std::uint64_t rewiring_events = 0;
    std::uint64_t restored_events = 0;
    std::size_t uncontrollable_steps = 0;
    std::size_t unconverged_mpc_steps = 0;

    std::size_t size() const { return times.size(); }
};

/// 1/(N-1) sum (w_i - w_d)^2.
inline double consensus_metric(std::span<const double> w, double w_d) {
    if (w.size() < 2) throw SimulationError("consensus_metric needs N >= 2");
    double s = 0.0;
    for (double x : w) s += (x - w_d) * (x - w_d);
    return s / static_cast<double>(w.size() - 1);
}

inline double controlled_fraction(const Network& net, int c_star) {
    std::size_t k = 0;
    for (int c : net.degrees())
        if (c >= c_star) ++k;
    return static_cast<double>(k) / static_cast<double>(net.n_nodes());
}

// Stream ids for independent random sources within one run.
enum RunStream : std::uint64_t { graph_stream = 1, opinion_stream = 2, rewiring_stream = 3 };

inline std::vector<double> initial_opinions(const SimConfig& cfg) {
    if (cfg.init_opinion == OpinionInit::explicit_vector) return cfg.opinions;
    Rng rng(stream_seed(cfg.seed, opinion_stream));
    std::vector<double> w(cfg.n);
    for (double& x : w) x = rng.uniform(cfg.opinion_lo, cfg.opinion_hi);
    return w;
}

inline Network initial_network(const SimConfig& cfg) {
    Rng rng(stream_seed(cfg.seed, graph_stream));
    return init_network(cfg.n, cfg.gamma, cfg.init_graph, rng, cfg.edge_policy);
}

/// Per sampling step: rewire over dt, compute the control on the updated
/// network (closed form when horizon_p == 1, otherwise the first component
/// of the MPC solution), advance opinions one RK step, record.
inline TrajectoryRecord run_simulation(const SimConfig& cfg) {
    cfg.validate();
    const std::size_t steps = cfg.steps();
    const RKTableau tab = RKTableau::by_name(cfg.tableau);
    std::optional<ControlConfig> cc = cfg.control;
    if (cc) cc->dt = cfg.dt;
    const double w_d = cc ? cc->w_d : 0.0;
    const int c_star = cc ? cc->c_star : 0;
    const RewireParams rewire{cfg.alpha, cfg.d_rate};

    Network net = initial_network(cfg);
    std::vector<double> w = initial_opinions(cfg);
    Rng rewiring_rng(stream_seed(cfg.seed, rewiring_stream));

    std::vector<std::size_t> snapshot_steps;
    for (double t : cfg.snapshot_times)
        snapshot_steps.push_back(static_cast<std::size_t>(std::llround((t - cfg.t0) / cfg.dt)));

    TrajectoryRecord rec;
    rec.times.reserve(steps + 1);
    auto record = [&](std::size_t k, double u) {
        const double t = cfg.t0 + static_cast<double>(k) * cfg.dt;
        rec.times.push_back(t);
        rec.opinions.push_back(w);
        rec.degrees.emplace_back(net.degrees().begin(), net.degrees().end());
        rec.control.push_back(u);
        rec.consensus.push_back(consensus_metric(w, w_d));
        rec.controlled_fraction.push_back(cc ? controlled_fraction(net, c_star) : 0.0);
        for (std::size_t i = 0; i < snapshot_steps.size(); ++i)
            if (snapshot_steps[i] == k) rec.snapshots.push_back(Snapshot{cfg.snapshot_times[i], net, w});
    };
    record(0, 0.0);

    const std::vector<double> no_control(cfg.n, 0.0);
    std::vector<double> warm;
    for (std::size_t k = 0; k < steps; ++k) {
        try {
            const auto ev = evolve_network(net, rewire, cfg.dt, rewiring_rng);
            rec.rewiring_events += ev.steps;
            rec.restored_events += ev.restored;

            double u = 0.0;
            std::vector<double> q = no_control;
            if (cc) {
                q = selector_Q(net, cc->c_star);
                if (cc->horizon_p == 1) {
                    const auto d = instantaneous_control(w, net, cfg.kernel, *cc);
                    u = d.u;
                    if (d.uncontrollable) ++rec.uncontrollable_steps;
                } else {
                    MpcOptions opt;
                    if (!warm.empty()) opt.initial_guess = warm;
                    const auto r = mpc_control(w, net, cfg.kernel, *cc, tab, opt);
                    u = r.controls.front();
                    if (r.uncontrollable) ++rec.uncontrollable_steps;
                    if (!r.converged) ++rec.unconverged_mpc_steps;
                    // receding horizon: shift the plan for the next warm start
                    warm.assign(r.controls.begin() + 1, r.controls.end());
                    warm.push_back(r.controls.back());
                }
            }
            w = step_opinions_rk(w, net, cfg.kernel, q, u, tab, cfg.dt);
            record(k + 1, u);
        } catch (const SimulationError&) {
            throw;
        } catch (const std::exception& e) {
            throw SimulationError("step " + std::to_string(k) + ": " + e.what());
        }
    }
    return rec;
}

struct SweepRow {
    int c_star = 0;
    double initial_v = 0.0;
    double final_v = 0.0;
    double final_controlled_fraction = 0.0;
    std::vector<double> times;
    std::vector<double> control; ///< u(t)
    std::size_t uncontrollable_steps = 0;
};

/// Run the same configuration (seed, initial graph and opinions, rewiring
/// draws) for each threshold. Rows come back in input order regardless of
/// how many worker threads execute the runs.
inline std::vector<SweepRow> sweep_c_star(const SimConfig& cfg, const std::vector<int>& c_star_values,
                                          unsigned threads = 1) {
    if (!cfg.control) throw SimulationError("sweep_c_star needs a control section");
    std::vector<SweepRow> rows(c_star_values.size());
    std::vector<std::string> errors(c_star_values.size());

    auto run_one = [&](std::size_t i) {
        try {
            SimConfig local = cfg;
            local.control->c_star = c_star_values[i];
            local.snapshot_times.clear();
            const auto rec = run_simulation(local);
            SweepRow& row = rows[i];
            row.c_star = c_star_values[i];
            row.initial_v = rec.consensus.front();
            row.final_v = rec.consensus.back();
            row.final_controlled_fraction = rec.controlled_fraction.back();
            row.times = rec.times;
            row.control = rec.control;
            row.uncontrollable_steps = rec.uncontrollable_steps;
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    };

    threads = std::max(1u, threads);
    if (threads == 1) {
        for (std::size_t i = 0; i < rows.size(); ++i) run_one(i);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t i = t; i < rows.size(); i += threads) run_one(i);
            });
    }
    for (std::size_t i = 0; i < errors.size(); ++i)
        if (!errors[i].empty())
            throw SimulationError("c* = " + std::to_string(c_star_values[i]) + ": " + errors[i]);
    return rows;
}

} // namespace opnet
