#pragma once

// Experiment configuration: a sectioned key/value file (YAML subset), its
// canonical serialization and a platform-stable hash.
//
//   seed: 20160914
//   graph:   { n, gamma, alpha, d_rate, init, edge_policy }
//   opinion: { lambda, beta, delta, init, lo, hi, values }
//   sim:     { t0, tf, dt, tableau, snapshot_times, threads }
//   control: { w_d, nu, nu_p, kappa, c_star, horizon_p }   (optional)
//   degree_master: { n, gamma, alpha, d_rate, runs, init, edge_policy,
//                    snapshot_times, stationary_time, stationary_samples,
//                    sample_interval, master_dt, window_lo, window_hi }
//   sweep:   { c_star }
//
// Requires linking yaml-cpp.

#include <charconv>
#include <cstdio>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "opnet/ensemble.hpp"
#include "opnet/io.hpp"
#include "opnet/sim.hpp"

namespace opnet {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    SimConfig sim{};
    DegreeStudyConfig degree{};
    std::vector<int> sweep_c_star{10, 20, 30};
    unsigned threads = 1;

    void set_seed(std::uint64_t s) {
        sim.seed = s;
        degree.seed = s;
    }

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

inline std::string policy_name(EdgePolicy p) {
    switch (p) {
    case EdgePolicy::pseudograph: return "pseudograph";
    case EdgePolicy::multigraph: return "multigraph";
    case EdgePolicy::simple: return "simple";
    }
    return "?";
}

inline std::string init_name(InitMode m) {
    return m == InitMode::uniform_degree ? "uniform_degree" : "uniform_random";
}

class Section {
public:
    Section(const YAML::Node& node, std::string name, std::set<std::string> allowed)
        : node_(node), name_(std::move(name)) {
        if (!node_) return;
        if (!node_.IsMap()) throw ConfigError("section '" + name_ + "' must be a mapping");
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!allowed.count(key)) throw ConfigError("unknown key '" + field(key) + "'");
        }
    }

    bool present() const { return static_cast<bool>(node_); }
    bool has(const std::string& key) const { return node_ && node_[key]; }
    std::string field(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

    std::string scalar(const std::string& key) const {
        const YAML::Node v = node_[key];
        if (!v.IsScalar()) throw ConfigError("'" + field(key) + "' must be a scalar");
        return v.Scalar();
    }

    double real(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        return parse_real(scalar(key), field(key));
    }

    template <typename Int>
    Int integer(const std::string& key, Int fallback) const {
        if (!has(key)) return fallback;
        const std::string s = scalar(key);
        Int v{};
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size())
            throw ConfigError("'" + field(key) + "' must be an integer, got '" + s + "'");
        return v;
    }

    std::string text(const std::string& key, const std::string& fallback) const {
        return has(key) ? scalar(key) : fallback;
    }

    std::vector<double> reals(const std::string& key, std::vector<double> fallback) const {
        if (!has(key)) return fallback;
        const YAML::Node v = node_[key];
        if (!v.IsSequence()) throw ConfigError("'" + field(key) + "' must be a list");
        std::vector<double> out;
        for (const auto& e : v) out.push_back(parse_real(e.Scalar(), field(key)));
        return out;
    }

    std::vector<int> ints(const std::string& key, std::vector<int> fallback) const {
        if (!has(key)) return fallback;
        const YAML::Node v = node_[key];
        if (!v.IsSequence()) throw ConfigError("'" + field(key) + "' must be a list");
        std::vector<int> out;
        for (const auto& e : v) {
            const std::string s = e.Scalar();
            int x{};
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
            if (ec != std::errc{} || p != s.data() + s.size())
                throw ConfigError("'" + field(key) + "' entries must be integers, got '" + s + "'");
            out.push_back(x);
        }
        return out;
    }

    static double parse_real(const std::string& s, const std::string& field) {
        if (s == "inf" || s == ".inf" || s == "+inf" || s == "+.inf") return unbounded;
        double v{};
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size() || std::isnan(v))
            throw ConfigError("'" + field + "' must be a number, got '" + s + "'");
        return v;
    }

private:
    YAML::Node node_;
    std::string name_;
};

inline EdgePolicy parse_policy(const std::string& s, const std::string& field) {
    if (s == "pseudograph") return EdgePolicy::pseudograph;
    if (s == "multigraph") return EdgePolicy::multigraph;
    if (s == "simple") return EdgePolicy::simple;
    throw ConfigError("'" + field + "' must be pseudograph, multigraph or simple, got '" + s + "'");
}

inline InitMode parse_init(const std::string& s, const std::string& field) {
    if (s == "uniform_degree") return InitMode::uniform_degree;
    if (s == "uniform_random") return InitMode::uniform_random;
    throw ConfigError("'" + field + "' must be uniform_degree or uniform_random, got '" + s + "'");
}

inline std::string real_text(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return format_double(v);
}

template <typename T, typename F>
std::string list_text(const std::vector<T>& xs, F fmt) {
    std::string s = "[";
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + fmt(xs[i]);
    return s + "]";
}

} // namespace detail

/// Parse configuration text. Missing keys take the defaults of SimConfig,
/// DegreeStudyConfig and ControlConfig; unknown keys are rejected.
inline RunConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    if (!root.IsMap()) throw ConfigError("config must be a mapping of sections");

    using detail::Section;
    RunConfig cfg;
    try {
        Section top(root, "", {"seed", "graph", "opinion", "sim", "control", "degree_master", "sweep"});
        cfg.set_seed(top.integer<std::uint64_t>("seed", default_seed));

        SimConfig& s = cfg.sim;
        Section g(root["graph"], "graph", {"n", "gamma", "alpha", "d_rate", "init", "edge_policy"});
        s.n = g.integer<std::size_t>("n", s.n);
        s.gamma = g.real("gamma", s.gamma);
        s.alpha = g.real("alpha", s.alpha);
        s.d_rate = g.real("d_rate", s.d_rate);
        s.init_graph = detail::parse_init(g.text("init", detail::init_name(s.init_graph)), g.field("init"));
        s.edge_policy =
            detail::parse_policy(g.text("edge_policy", detail::policy_name(s.edge_policy)), g.field("edge_policy"));

        Section o(root["opinion"], "opinion", {"lambda", "beta", "delta", "init", "lo", "hi", "values"});
        s.kernel.lambda = o.real("lambda", s.kernel.lambda);
        s.kernel.beta = o.real("beta", s.kernel.beta);
        s.kernel.delta = o.real("delta", s.kernel.delta);
        const std::string oi = o.text("init", "uniform_random");
        if (oi == "uniform_random") {
            s.init_opinion = OpinionInit::uniform_random;
        } else if (oi == "explicit") {
            s.init_opinion = OpinionInit::explicit_vector;
        } else {
            throw ConfigError("'opinion.init' must be uniform_random or explicit, got '" + oi + "'");
        }
        s.opinion_lo = o.real("lo", s.opinion_lo);
        s.opinion_hi = o.real("hi", s.opinion_hi);
        s.opinions = o.reals("values", {});
        if (s.init_opinion == OpinionInit::explicit_vector && s.opinions.size() != s.n)
            throw ConfigError("'opinion.values' must have graph.n entries");

        Section sm(root["sim"], "sim", {"t0", "tf", "dt", "tableau", "snapshot_times", "threads"});
        s.t0 = sm.real("t0", s.t0);
        s.tf = sm.real("tf", s.tf);
        s.dt = sm.real("dt", s.dt);
        if (!(s.tf > s.t0)) throw ConfigError("'sim.tf' must exceed 'sim.t0'");
        if (!(s.dt > 0.0)) throw ConfigError("'sim.dt' must be positive");
        s.tableau = sm.text("tableau", s.tableau);
        s.snapshot_times = sm.reals("snapshot_times", {});
        cfg.threads = sm.integer<unsigned>("threads", cfg.threads);

        Section c(root["control"], "control", {"w_d", "nu", "nu_p", "kappa", "c_star", "horizon_p"});
        if (c.present()) {
            ControlConfig cc;
            cc.w_d = c.real("w_d", cc.w_d);
            cc.nu = c.real("nu", cc.nu);
            if (c.has("nu_p")) cc.nu_p = c.real("nu_p", 0.0);
            cc.kappa = c.real("kappa", cc.kappa);
            cc.c_star = c.integer<int>("c_star", cc.c_star);
            cc.horizon_p = c.integer<int>("horizon_p", cc.horizon_p);
            cc.dt = s.dt;
            s.control = cc;
        }

        DegreeStudyConfig& d = cfg.degree;
        Section dm(root["degree_master"], "degree_master",
                   {"n", "gamma", "alpha", "d_rate", "runs", "init", "edge_policy", "snapshot_times",
                    "stationary_time", "stationary_samples", "sample_interval", "master_dt", "window_lo",
                    "window_hi"});
        d.n = dm.integer<std::size_t>("n", d.n);
        d.gamma = dm.real("gamma", d.gamma);
        d.alpha = dm.real("alpha", d.alpha);
        d.d_rate = dm.real("d_rate", d.d_rate);
        d.runs = dm.integer<std::size_t>("runs", d.runs);
        d.init = detail::parse_init(dm.text("init", detail::init_name(d.init)), dm.field("init"));
        d.edge_policy =
            detail::parse_policy(dm.text("edge_policy", detail::policy_name(d.edge_policy)), dm.field("edge_policy"));
        d.snapshot_times = dm.reals("snapshot_times", {});
        d.stationary_time = dm.real("stationary_time", d.stationary_time);
        d.stationary_samples = dm.integer<std::size_t>("stationary_samples", d.stationary_samples);
        d.sample_interval = dm.real("sample_interval", d.sample_interval);
        d.master_dt = dm.real("master_dt", d.master_dt);
        d.window_lo = dm.integer<std::size_t>("window_lo", d.window_lo);
        d.window_hi = dm.integer<std::size_t>("window_hi", d.window_hi);

        Section sw(root["sweep"], "sweep", {"c_star"});
        cfg.sweep_c_star = sw.ints("c_star", cfg.sweep_c_star);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }

    for (const auto& [section, n, gamma] : {std::tuple{"graph", cfg.sim.n, cfg.sim.gamma},
                                            std::tuple{"degree_master", cfg.degree.n, cfg.degree.gamma}}) {
        try {
            edge_count_for(n, gamma);
        } catch (const GraphError& e) {
            throw ConfigError("'" + std::string(section) + ".gamma': " + e.what());
        }
    }
    try {
        cfg.sim.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid simulation settings: ") + e.what());
    }
    try {
        cfg.degree.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid degree_master settings: ") + e.what());
    }
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

/// Canonical text form; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const RunConfig& cfg) {
    using detail::real_text;
    auto reals = [](const std::vector<double>& v) { return detail::list_text(v, real_text); };
    const SimConfig& s = cfg.sim;
    const DegreeStudyConfig& d = cfg.degree;
    std::ostringstream out;
    out << "seed: " << s.seed << "\n";
    out << "graph:\n"
        << "  n: " << s.n << "                # N, number of agents\n"
        << "  gamma: " << real_text(s.gamma) << "   # gamma = 2E/N, density of connectivity\n"
        << "  alpha: " << real_text(s.alpha) << "   # alpha, attraction coefficient\n"
        << "  d_rate: " << real_text(s.d_rate) << "  # D, rewiring events per unit time\n"
        << "  init: " << detail::init_name(s.init_graph) << "\n"
        << "  edge_policy: " << detail::policy_name(s.edge_policy) << "\n";
    out << "opinion:\n"
        << "  lambda: " << real_text(s.kernel.lambda) << "  # lambda in K\n"
        << "  beta: " << real_text(s.kernel.beta) << "    # beta in K\n"
        << "  delta: " << real_text(s.kernel.delta) << "   # Delta, confidence bound in H\n"
        << "  init: " << (s.init_opinion == OpinionInit::explicit_vector ? "explicit" : "uniform_random") << "\n"
        << "  lo: " << real_text(s.opinion_lo) << "\n"
        << "  hi: " << real_text(s.opinion_hi) << "\n";
    if (s.init_opinion == OpinionInit::explicit_vector) out << "  values: " << reals(s.opinions) << "\n";
    out << "sim:\n"
        << "  t0: " << real_text(s.t0) << "\n"
        << "  tf: " << real_text(s.tf) << "\n"
        << "  dt: " << real_text(s.dt) << "   # sampling step\n"
        << "  tableau: " << s.tableau << "\n"
        << "  snapshot_times: " << reals(s.snapshot_times) << "\n"
        << "  threads: " << cfg.threads << "\n";
    if (s.control) {
        const ControlConfig& c = *s.control;
        out << "control:\n"
            << "  w_d: " << real_text(c.w_d) << "    # target opinion\n"
            << "  nu: " << real_text(c.nu) << "     # control penalty\n";
        if (c.nu_p) out << "  nu_p: " << real_text(*c.nu_p) << "\n";
        out << "  kappa: " << real_text(c.kappa) << "  # admissible controls [-kappa, kappa]\n"
            << "  c_star: " << c.c_star << "  # degree threshold c*\n"
            << "  horizon_p: " << c.horizon_p << "\n";
    }
    out << "degree_master:\n"
        << "  n: " << d.n << "\n"
        << "  gamma: " << real_text(d.gamma) << "\n"
        << "  alpha: " << real_text(d.alpha) << "\n"
        << "  d_rate: " << real_text(d.d_rate) << "\n"
        << "  runs: " << d.runs << "\n"
        << "  init: " << detail::init_name(d.init) << "\n"
        << "  edge_policy: " << detail::policy_name(d.edge_policy) << "\n"
        << "  snapshot_times: " << reals(d.snapshot_times) << "\n"
        << "  stationary_time: " << real_text(d.stationary_time) << "\n"
        << "  stationary_samples: " << d.stationary_samples << "\n"
        << "  sample_interval: " << real_text(d.sample_interval) << "\n"
        << "  master_dt: " << real_text(d.master_dt) << "\n"
        << "  window_lo: " << d.window_lo << "\n"
        << "  window_hi: " << d.window_hi << "\n";
    out << "sweep:\n"
        << "  c_star: " << detail::list_text(cfg.sweep_c_star, [](int v) { return std::to_string(v); }) << "\n";
    return out.str();
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// fnv1a64 of the canonical serialization, as 16 hex digits.
inline std::string config_hash(const RunConfig& cfg) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(serialize_config(cfg))));
    return buf;
}

} // namespace opnet
