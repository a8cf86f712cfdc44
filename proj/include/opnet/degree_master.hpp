#pragma once

// Degree-distribution master equation for the rewiring process, its two
// closed-form stationary laws, and comparison utilities.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "opnet/graph.hpp"

namespace opnet {

class MasterError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Probability vector over degrees 0..c_max.
struct DegreeDistribution {
    std::vector<double> probs;

    std::size_t c_max() const { return probs.empty() ? 0 : probs.size() - 1; }
    std::size_t size() const { return probs.size(); }
    double operator[](std::size_t c) const { return probs[c]; }

    double total() const { return std::accumulate(probs.begin(), probs.end(), 0.0); }

    double mean() const {
        double m = 0.0;
        for (std::size_t c = 0; c < probs.size(); ++c) m += static_cast<double>(c) * probs[c];
        return m;
    }

    void validate(double tol = 1e-10) const {
        if (probs.empty()) throw MasterError("empty degree distribution");
        for (double v : probs)
            if (!(v >= 0.0)) throw MasterError("negative or NaN probability");
        if (std::abs(total() - 1.0) > tol) throw MasterError("probabilities do not sum to 1");
    }

    static DegreeDistribution point_mass(std::size_t c, std::size_t c_max) {
        if (c > c_max) throw MasterError("point mass outside support");
        DegreeDistribution d{std::vector<double>(c_max + 1, 0.0)};
        d.probs[c] = 1.0;
        return d;
    }
};

struct MasterParams {
    double d_rate = 1.0;      // D
    std::size_t n_edges = 1;  // E
    std::size_t n_nodes = 2;  // N
    double alpha = 0.01;

    double removal_rate() const { return d_rate / static_cast<double>(n_edges); }
    double attachment_rate() const {
        return 2.0 * d_rate / (2.0 * static_cast<double>(n_edges) + static_cast<double>(n_nodes) * alpha);
    }
    double gamma() const { return 2.0 * static_cast<double>(n_edges) / static_cast<double>(n_nodes); }

    void validate() const {
        if (!(d_rate > 0.0) || !(alpha > 0.0) || n_edges == 0 || n_nodes == 0)
            throw MasterError("master equation parameters must be positive");
    }
};

/// Right-hand side of the master equation, written as a birth-death chain
/// with up-flux (c+alpha) * 2D/(2E+N alpha) * p(c) and down-flux c D/E p(c).
/// The support ends at p.size()-1; no flux crosses that boundary.
inline std::vector<double> master_rhs(std::span<const double> p, const MasterParams& mp) {
    const std::size_t n = p.size();
    const double mu = mp.removal_rate();
    const double lambda = mp.attachment_rate();
    std::vector<double> up(n, 0.0), down(n, 0.0), out(n, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
        const auto cd = static_cast<double>(c);
        if (c + 1 < n) up[c] = lambda * (cd + mp.alpha) * p[c];
        down[c] = mu * cd * p[c];
    }
    for (std::size_t c = 0; c < n; ++c) {
        double gain = (c > 0 ? up[c - 1] : 0.0) + (c + 1 < n ? down[c + 1] : 0.0);
        out[c] = gain - up[c] - down[c];
    }
    return out;
}

/// Step-size heuristic 0.1 E / (D c_max).
inline double master_stable_dt(const MasterParams& mp, std::size_t c_max) {
    return 0.1 * static_cast<double>(mp.n_edges) / (mp.d_rate * static_cast<double>(std::max<std::size_t>(c_max, 1)));
}

namespace detail {

inline void rk4_master_step(std::vector<double>& p, const MasterParams& mp, double h) {
    const std::size_t n = p.size();
    std::vector<double> tmp(n);
    auto k1 = master_rhs(p, mp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = p[i] + 0.5 * h * k1[i];
    auto k2 = master_rhs(tmp, mp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = p[i] + 0.5 * h * k2[i];
    auto k3 = master_rhs(tmp, mp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = p[i] + h * k3[i];
    auto k4 = master_rhs(tmp, mp);
    for (std::size_t i = 0; i < n; ++i) p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

// Clip round-off negatives; anything below -1e-9 is an instability.
inline void enforce_positivity(std::vector<double>& p, std::size_t step) {
    bool clipped = false;
    for (std::size_t c = 0; c < p.size(); ++c) {
        if (p[c] < -1e-9 || std::isnan(p[c]))
            throw MasterError("master equation integration unstable at step " + std::to_string(step) +
                              " (p[" + std::to_string(c) + "] = " + std::to_string(p[c]) + ")");
        if (p[c] < 0.0) {
            p[c] = 0.0;
            clipped = true;
        }
    }
    if (clipped) {
        const double s = std::accumulate(p.begin(), p.end(), 0.0);
        for (double& v : p) v /= s;
    }
}

} // namespace detail

/// Classical RK4 integration of the master equation, returning the
/// distribution at each of `times` (non-decreasing, >= 0). Step size is
/// the largest h <= dt that lands exactly on every output time.
inline std::vector<DegreeDistribution> integrate_master_at(const DegreeDistribution& p0, const MasterParams& mp,
                                                           std::span<const double> times, double dt) {
    mp.validate();
    p0.validate();
    if (!(dt > 0.0)) throw MasterError("dt must be positive");
    std::vector<DegreeDistribution> out;
    std::vector<double> p = p0.probs;
    double t = 0.0;
    std::size_t step = 0;
    for (double target : times) {
        if (!(target >= t)) throw MasterError("output times must be non-decreasing and >= 0");
        const double span = target - t;
        const auto n = static_cast<std::size_t>(std::ceil(span / dt - 1e-12));
        if (n > 0) {
            const double h = span / static_cast<double>(n);
            for (std::size_t k = 0; k < n; ++k) {
                detail::rk4_master_step(p, mp, h);
                detail::enforce_positivity(p, ++step);
            }
        }
        t = target;
        out.push_back(DegreeDistribution{p});
    }
    return out;
}

inline DegreeDistribution integrate_master(const DegreeDistribution& p0, const MasterParams& mp, double t_end,
                                           double dt) {
    if (!(t_end >= 0.0)) throw MasterError("t_end must be non-negative");
    const double times[] = {t_end};
    return integrate_master_at(p0, mp, times, dt).front();
}

/// Un-normalized power law (alpha/gamma)^alpha * alpha / c, for c >= 1.
inline double power_law_raw(double alpha, double gamma, std::size_t c) {
    return std::pow(alpha / gamma, alpha) * alpha / static_cast<double>(c);
}

/// Power law on 1..c_max, p(0)=0, renormalized over the truncated support.
inline DegreeDistribution stationary_power_law(double alpha, double gamma, std::size_t c_max) {
    if (!(alpha > 0.0) || !(gamma > 0.0) || c_max < 1) throw MasterError("invalid power-law parameters");
    DegreeDistribution d{std::vector<double>(c_max + 1, 0.0)};
    for (std::size_t c = 1; c <= c_max; ++c) d.probs[c] = power_law_raw(alpha, gamma, c);
    const double s = d.total();
    for (double& v : d.probs) v /= s;
    return d;
}

/// Poisson(gamma) truncated at c_max and renormalized.
inline DegreeDistribution stationary_poisson(double gamma, std::size_t c_max) {
    if (!(gamma > 0.0)) throw MasterError("gamma must be positive");
    DegreeDistribution d{std::vector<double>(c_max + 1, 0.0)};
    for (std::size_t c = 0; c <= c_max; ++c) {
        const auto cd = static_cast<double>(c);
        d.probs[c] = std::exp(cd * std::log(gamma) - gamma - std::lgamma(cd + 1.0));
    }
    const double s = d.total();
    for (double& v : d.probs) v /= s;
    return d;
}

/// Degree histogram normalized by N, over 0..E (0..2E for pseudographs).
inline DegreeDistribution empirical_degree_distribution(const Network& net) {
    DegreeDistribution d{std::vector<double>(degree_bound(net.policy(), net.n_edges()) + 1, 0.0)};
    for (int c : net.degrees()) d.probs[static_cast<std::size_t>(c)] += 1.0;
    for (double& v : d.probs) v /= static_cast<double>(net.n_nodes());
    return d;
}

/// Extend the support with zeros up to `size` entries.
inline DegreeDistribution padded(const DegreeDistribution& p, std::size_t size) {
    if (size < p.size()) throw MasterError("padded: cannot shrink a distribution");
    DegreeDistribution out = p;
    out.probs.resize(size, 0.0);
    return out;
}

inline double total_variation(const DegreeDistribution& p, const DegreeDistribution& q) {
    if (p.size() != q.size())
        throw MasterError("total_variation: support length mismatch (" + std::to_string(p.size()) + " vs " +
                          std::to_string(q.size()) + ")");
    double s = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c) s += std::abs(p.probs[c] - q.probs[c]);
    return 0.5 * s;
}

/// Zero outside [lo, hi], renormalize inside.
inline DegreeDistribution restrict_to(const DegreeDistribution& p, std::size_t lo, std::size_t hi) {
    DegreeDistribution out{std::vector<double>(p.size(), 0.0)};
    double s = 0.0;
    for (std::size_t c = lo; c <= hi && c < p.size(); ++c) {
        out.probs[c] = p.probs[c];
        s += p.probs[c];
    }
    if (!(s > 0.0)) throw MasterError("no mass in window [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    for (double& v : out.probs) v /= s;
    return out;
}

/// Least-squares slope of log p(c) against log c over the non-empty bins in [lo, hi].
inline double loglog_slope(const DegreeDistribution& p, std::size_t lo, std::size_t hi) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t m = 0;
    for (std::size_t c = std::max<std::size_t>(lo, 1); c <= hi && c < p.size(); ++c) {
        if (!(p.probs[c] > 0.0)) continue;
        const double x = std::log(static_cast<double>(c));
        const double y = std::log(p.probs[c]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 2) throw MasterError("loglog_slope needs at least two non-empty bins");
    const auto md = static_cast<double>(m);
    return (md * sxy - sx * sy) / (md * sxx - sx * sx);
}

} // namespace opnet
