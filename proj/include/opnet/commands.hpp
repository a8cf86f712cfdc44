#pragma once

// Subcommand drivers behind the opnet executable. Each returns a process
// exit status:
//   0  success
//   1  usage error (bad command line)
//   2  configuration error (unreadable file, bad key or value)
//   3  simulation error (numerical failure, violated precondition)
//   4  I/O error (output directory or file not writable)

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "opnet/config.hpp"
#include "opnet/degree_master.hpp"
#include "opnet/ensemble.hpp"
#include "opnet/io.hpp"
#include "opnet/sim.hpp"

namespace opnet {

enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_config = 2, exit_simulation = 3, exit_io = 4 };

struct CommandOptions {
    std::filesystem::path config;
    std::filesystem::path out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::vector<int>> c_star; ///< sweep only
};

/// Model parameters keyed by symbol.
inline nlohmann::json parameter_echo(const RunConfig& cfg) {
    const SimConfig& s = cfg.sim;
    nlohmann::json j{{"N", s.n},
                     {"gamma", s.gamma},
                     {"E", edge_count_for(s.n, s.gamma)},
                     {"alpha", s.alpha},
                     {"D", s.d_rate},
                     {"t0", s.t0},
                     {"tf", s.tf},
                     {"dt", s.dt},
                     {"lambda", s.kernel.lambda},
                     {"beta", s.kernel.beta},
                     {"Delta", s.kernel.delta},
                     {"tableau", s.tableau},
                     {"opinion_init", s.init_opinion == OpinionInit::explicit_vector ? "explicit" : "uniform_random"},
                     {"opinion_interval", {s.opinion_lo, s.opinion_hi}},
                     {"graph_init", detail::init_name(s.init_graph)},
                     {"edge_policy", detail::policy_name(s.edge_policy)},
                     {"seed", s.seed},
                     {"snapshot_times", s.snapshot_times}};
    if (s.control) {
        const ControlConfig& c = *s.control;
        ControlConfig at_dt = c;
        at_dt.dt = s.dt;
        j["control"] = {{"w_d", c.w_d},
                        {"nu", c.nu},
                        {"nu_p", at_dt.horizon_penalty()},
                        {"kappa", std::isinf(c.kappa) ? nlohmann::json("inf") : nlohmann::json(c.kappa)},
                        {"c_star", c.c_star},
                        {"p", c.horizon_p}};
    } else {
        j["control"] = nullptr;
    }
    return j;
}

inline nlohmann::json degree_parameter_echo(const DegreeStudyConfig& d) {
    return {{"N", d.n},
            {"gamma", d.gamma},
            {"E", d.n_edges()},
            {"alpha", d.alpha},
            {"D", d.d_rate},
            {"runs", d.runs},
            {"graph_init", detail::init_name(d.init)},
            {"edge_policy", detail::policy_name(d.edge_policy)},
            {"seed", d.seed},
            {"snapshot_times", d.snapshot_times},
            {"stationary_time", d.stationary_time},
            {"stationary_samples", d.stationary_samples},
            {"sample_interval", d.sample_interval},
            {"window", {d.window_lo, d.window_hi}}};
}

/// manifest.json in the output directory: written with status "running"
/// before any data file and rewritten with the file list on completion.
class RunManifest {
public:
    RunManifest(std::filesystem::path dir, std::string command, const RunConfig& cfg, nlohmann::json parameters)
        : dir_(std::move(dir)), start_(std::chrono::steady_clock::now()) {
        doc_ = {{"command", std::move(command)},
                {"status", "running"},
                {"config_hash", config_hash(cfg)},
                {"seed", cfg.sim.seed},
                {"parameters", std::move(parameters)},
                {"files", nlohmann::json::array()}};
        write_json(path(), doc_);
    }

    std::filesystem::path path() const { return dir_ / "manifest.json"; }

    /// Register a file (relative to the output directory) and return its full path.
    std::filesystem::path file(const std::string& name) {
        doc_["files"].push_back(name);
        return dir_ / name;
    }

    void set(const std::string& key, nlohmann::json value) { doc_[key] = std::move(value); }

    void finish(const std::string& status, const std::string& error = {}) {
        doc_["status"] = status;
        if (!error.empty()) doc_["error"] = error;
        doc_["duration_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        write_json(path(), doc_);
    }

private:
    std::filesystem::path dir_;
    std::chrono::steady_clock::time_point start_;
    nlohmann::json doc_;
};

namespace detail {

inline void prepare_output_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw IoError("cannot create output directory '" + dir.string() + "'");
}

inline RunConfig load_for_command(const CommandOptions& opt) {
    RunConfig cfg = load_config(opt.config);
    if (opt.seed) cfg.set_seed(*opt.seed);
    return cfg;
}

inline void write_config_echo(RunManifest& m, const RunConfig& cfg) {
    const auto p = m.file("config.yaml");
    auto out = open_output(p);
    out << serialize_config(cfg);
    finish_output(out, p);
}

inline std::string snapshot_name(const std::string& stem, std::size_t k) {
    return stem + "_" + std::to_string(k);
}

// Map exceptions onto exit codes; the manifest (if any) records the failure.
template <typename Body>
int run_guarded(std::ostream& err, std::optional<RunManifest>& manifest, Body&& body) {
    auto fail = [&](int code, const std::string& what) {
        err << "error: " << what << '\n';
        if (manifest) {
            try {
                manifest->finish("failed", what);
            } catch (...) {
            }
        }
        return code;
    };
    try {
        body();
    } catch (const ConfigError& e) {
        return fail(exit_config, e.what());
    } catch (const IoError& e) {
        return fail(exit_io, e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return fail(exit_io, e.what());
    } catch (const std::exception& e) {
        return fail(exit_simulation, e.what());
    }
    try {
        manifest->finish("ok");
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_io;
    }
    return exit_ok;
}

} // namespace detail

/// Trajectory CSV and JSON, canonical config echo, and one JSON graph
/// snapshot per requested time.
inline int cmd_simulate(const CommandOptions& opt, std::ostream& err = std::cerr) {
    std::optional<RunManifest> manifest;
    return detail::run_guarded(err, manifest, [&] {
        const RunConfig cfg = detail::load_for_command(opt);
        detail::prepare_output_dir(opt.out_dir);
        manifest.emplace(opt.out_dir, "simulate", cfg, parameter_echo(cfg));
        detail::write_config_echo(*manifest, cfg);

        const TrajectoryRecord rec = run_simulation(cfg.sim);
        write_trajectory_csv(manifest->file("trajectory.csv"), rec);
        write_json(manifest->file("trajectory.json"), trajectory_json(rec));
        for (std::size_t k = 0; k < rec.snapshots.size(); ++k) {
            const Snapshot& s = rec.snapshots[k];
            write_json(manifest->file(detail::snapshot_name("snapshot", k) + ".json"),
                       snapshot_json(s.net, s.time, s.w));
        }
        manifest->set("summary", {{"initial_V", rec.consensus.front()},
                                  {"final_V", rec.consensus.back()},
                                  {"rewiring_events", rec.rewiring_events},
                                  {"restored_events", rec.restored_events},
                                  {"uncontrollable_steps", rec.uncontrollable_steps},
                                  {"unconverged_mpc_steps", rec.unconverged_mpc_steps}});
    });
}

/// Monte Carlo degree histograms and master-equation solutions at each
/// snapshot time, the stationary histogram, both closed-form stationary
/// shapes, and a summary of distances between them.
inline int cmd_degree_dist(const CommandOptions& opt, std::ostream& err = std::cerr) {
    std::optional<RunManifest> manifest;
    return detail::run_guarded(err, manifest, [&] {
        const RunConfig cfg = detail::load_for_command(opt);
        const DegreeStudyConfig& d = cfg.degree;
        detail::prepare_output_dir(opt.out_dir);
        manifest.emplace(opt.out_dir, "degree-dist", cfg, degree_parameter_echo(d));
        detail::write_config_echo(*manifest, cfg);

        // time 0 is always sampled; it seeds the master equation
        DegreeStudyConfig run = d;
        run.snapshot_times.insert(run.snapshot_times.begin(), 0.0);
        const EnsembleResult ens = degree_ensemble(run);
        const std::size_t support = ens.at_snapshots.front().size();
        const std::size_t c_max = support - 1;

        CsvTable summary({"metric", "time", "value"});
        auto add = [&](const std::string& metric, double t, double v) {
            summary.add_row({metric, format_double(t), format_double(v)});
        };

        if (!d.snapshot_times.empty()) {
            const MasterParams mp = d.master_params();
            const double h = d.master_dt > 0.0 ? d.master_dt : master_stable_dt(mp, c_max);
            const auto master = integrate_master_at(ens.at_snapshots.front(), mp, d.snapshot_times, h);
            for (std::size_t k = 0; k < d.snapshot_times.size(); ++k) {
                const DegreeDistribution& mc = ens.at_snapshots[k + 1];
                write_distribution_csv(manifest->file(detail::snapshot_name("mc_snapshot", k) + ".csv"), mc);
                write_distribution_csv(manifest->file(detail::snapshot_name("master_snapshot", k) + ".csv"),
                                       master[k]);
                add("tv_mc_master", d.snapshot_times[k], total_variation(mc, master[k]));
                add("master_mass", d.snapshot_times[k], master[k].total());
                add("master_mean", d.snapshot_times[k], master[k].mean());
            }
        }

        const DegreeDistribution power = stationary_power_law(d.alpha, d.gamma, c_max);
        CsvTable shape({"c", "raw", "p"});
        for (std::size_t c = 0; c < support; ++c)
            shape.add_row({std::to_string(c), format_double(c == 0 ? 0.0 : power_law_raw(d.alpha, d.gamma, c)),
                           format_double(power[c])});
        shape.write(manifest->file("power_law.csv"));
        const DegreeDistribution poisson = stationary_poisson(d.gamma, c_max);
        write_distribution_csv(manifest->file("poisson.csv"), poisson);

        // Compare the closed forms with the stationary histogram, or with the
        // last snapshot when no stationary time is configured.
        const DegreeDistribution* target = nullptr;
        double target_time = 0.0;
        if (ens.stationary) {
            write_distribution_csv(manifest->file("mc_stationary.csv"), *ens.stationary);
            target = &*ens.stationary;
            target_time = d.stationary_time;
        } else if (!d.snapshot_times.empty()) {
            target = &ens.at_snapshots.back();
            target_time = d.snapshot_times.back();
        }
        if (target) {
            add("tv_power_law", target_time, total_variation(*target, power));
            add("tv_power_law_window", target_time,
                total_variation(restrict_to(*target, d.window_lo, d.window_hi),
                                restrict_to(power, d.window_lo, d.window_hi)));
            add("loglog_slope_window", target_time, loglog_slope(*target, d.window_lo, d.window_hi));
            add("tv_poisson", target_time, total_variation(*target, poisson));
            add("p0", target_time, (*target)[0]);
        }
        add("rewiring_events", 0.0, static_cast<double>(ens.events));
        summary.write(manifest->file("summary.csv"));
    });
}

/// One controlled run per threshold with common random numbers; a table of
/// final consensus and controlled fraction plus the u(t) trace of each run.
inline int cmd_sweep(const CommandOptions& opt, std::ostream& err = std::cerr) {
    std::optional<RunManifest> manifest;
    return detail::run_guarded(err, manifest, [&] {
        RunConfig cfg = detail::load_for_command(opt);
        if (opt.c_star) cfg.sweep_c_star = *opt.c_star;
        if (!cfg.sim.control) throw ConfigError("sweep needs a 'control' section");
        if (cfg.sweep_c_star.empty()) throw ConfigError("'sweep.c_star' must not be empty");
        detail::prepare_output_dir(opt.out_dir);
        nlohmann::json params = parameter_echo(cfg);
        params["c_star_values"] = cfg.sweep_c_star;
        manifest.emplace(opt.out_dir, "sweep", cfg, std::move(params));
        detail::write_config_echo(*manifest, cfg);

        const auto rows = sweep_c_star(cfg.sim, cfg.sweep_c_star, cfg.threads);
        CsvTable table({"c_star", "initial_V", "final_V", "controlled_fraction", "uncontrollable_steps"});
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const SweepRow& r = rows[i];
            table.add_row({std::to_string(r.c_star), format_double(r.initial_v), format_double(r.final_v),
                           format_double(r.final_controlled_fraction), std::to_string(r.uncontrollable_steps)});
            CsvTable trace({"t", "u"});
            for (std::size_t k = 0; k < r.times.size(); ++k)
                trace.add_row({format_double(r.times[k]), format_double(r.control[k])});
            trace.write(manifest->file("control_" + std::to_string(i) + "_cstar_" + std::to_string(r.c_star) + ".csv"));
        }
        table.write(manifest->file("sweep.csv"));
    });
}

} // namespace opnet
