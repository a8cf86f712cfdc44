#pragma once

// Degree-selective control of the opinion dynamics: selector Q, the
// closed-form one-step (instantaneous) control and finite-horizon MPC over
// an explicit Runge-Kutta discretisation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "opnet/graph.hpp"
#include "opnet/opinion.hpp"

namespace opnet {

inline constexpr double unbounded = std::numeric_limits<double>::infinity();

struct ControlConfig {
    double w_d = 0.8;             ///< target opinion
    double nu = 1.0;              ///< control penalty
    std::optional<double> nu_p;   ///< horizon penalty; defaults to dt * nu
    double kappa = 0.1;           ///< admissible set U = [-kappa, kappa]
    int c_star = 10;              ///< degree threshold for control
    int horizon_p = 1;            ///< prediction steps
    double dt = 0.05;             ///< sampling step

    double horizon_penalty() const { return nu_p.value_or(dt * nu); }
    double clamp(double u) const { return std::clamp(u, -kappa, kappa); }

    void validate() const {
        if (!(w_d >= -1.0 && w_d <= 1.0)) throw std::invalid_argument("w_d must lie in [-1, 1]");
        if (!(nu >= 0.0)) throw std::invalid_argument("nu must be non-negative");
        if (nu_p && !(*nu_p >= 0.0)) throw std::invalid_argument("nu_p must be non-negative");
        if (!(kappa >= 0.0)) throw std::invalid_argument("kappa must be non-negative");
        if (horizon_p < 1) throw std::invalid_argument("horizon_p must be >= 1");
        if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    }

    friend bool operator==(const ControlConfig&, const ControlConfig&) = default;
};

/// Explicit Butcher tableau.
struct RKTableau {
    std::string name;
    std::vector<std::vector<double>> a; // a[l][k], strictly lower triangular
    std::vector<double> b;
    std::vector<double> theta;

    std::size_t stages() const { return b.size(); }

    void validate() const {
        const std::size_t s = stages();
        if (s == 0 || a.size() != s || theta.size() != s) throw std::invalid_argument("tableau shape mismatch");
        double sum = 0.0;
        for (double v : b) sum += v;
        if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("tableau weights must sum to 1");
        for (std::size_t l = 0; l < s; ++l) {
            if (a[l].size() != s) throw std::invalid_argument("tableau row length mismatch");
            for (std::size_t k = l; k < s; ++k)
                if (a[l][k] != 0.0) throw std::invalid_argument("tableau " + name + " is not explicit");
        }
    }

    static RKTableau explicit_euler() { return {"euler", {{0.0}}, {1.0}, {0.0}}; }

    static RKTableau heun() { return {"heun", {{0.0, 0.0}, {1.0, 0.0}}, {0.5, 0.5}, {0.0, 1.0}}; }

    static RKTableau rk4() {
        return {"rk4",
                {{0.0, 0.0, 0.0, 0.0}, {0.5, 0.0, 0.0, 0.0}, {0.0, 0.5, 0.0, 0.0}, {0.0, 0.0, 1.0, 0.0}},
                {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0},
                {0.0, 0.5, 0.5, 1.0}};
    }

    static RKTableau by_name(const std::string& n) {
        if (n == "euler") return explicit_euler();
        if (n == "heun") return heun();
        if (n == "rk4") return rk4();
        throw std::invalid_argument("unknown Runge-Kutta tableau '" + n + "' (euler, heun, rk4)");
    }
};

/// Q_i = 1 iff c_i >= c_star.
inline std::vector<double> selector_Q(const Network& net, int c_star) {
    std::vector<double> q(net.n_nodes());
    const auto deg = net.degrees();
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = deg[i] >= c_star ? 1.0 : 0.0;
    return q;
}

/// Running cost 1/2 [ (1/N) sum (w_j - w_d)^2 + penalty u^2 ].
inline double running_cost(std::span<const double> w, double u, double w_d, double penalty) {
    double s = 0.0;
    for (double x : w) s += (x - w_d) * (x - w_d);
    return 0.5 * (s / static_cast<double>(w.size()) + penalty * u * u);
}

inline double running_cost(std::span<const double> w, double u, const ControlConfig& cc) {
    return running_cost(w, u, cc.w_d, cc.nu);
}

/// One explicit RK step of w' = F(w) + u Q with the network frozen and u
/// held constant across the stages.
inline std::vector<double> step_opinions_rk(std::span<const double> w, const Network& net, const KernelParams& kp,
                                            std::span<const double> q, double u, const RKTableau& tab, double dt) {
    const std::size_t n = w.size();
    const std::size_t s = tab.stages();
    std::vector<std::vector<double>> slopes(s, std::vector<double>(n));
    std::vector<double> stage(n);
    for (std::size_t l = 0; l < s; ++l) {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k < l; ++k) acc += tab.a[l][k] * slopes[k][i];
            stage[i] = w[i] + dt * acc;
        }
        auto f = opinion_rhs(std::span<const double>(stage), net, kp);
        for (std::size_t i = 0; i < n; ++i) slopes[l][i] = f[i] + u * q[i];
    }
    std::vector<double> next(w.begin(), w.end());
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t l = 0; l < s; ++l) acc += tab.b[l] * slopes[l][i];
        next[i] += dt * acc;
    }
    return next;
}

struct ControlDecision {
    double u = 0.0;       ///< applied control, clamped to [-kappa, kappa]
    double raw = 0.0;     ///< unclamped stationary point of the one-step cost
    bool uncontrollable = false; ///< no node meets the degree threshold
};

/// Closed-form minimiser of the one-step explicit-Euler cost
///   dt { (1/N) sum (w_j^{n+1} - w_d)^2 + dt nu u^2 },
///   w^{n+1} = w + dt (F + u Q),
/// i.e. u = -(sum Q_j (w_j - w_d) + dt sum Q_j F_j) / (N nu + dt sum Q_j^2).
inline ControlDecision instantaneous_control(std::span<const double> w, const Network& net, const KernelParams& kp,
                                             const ControlConfig& cc) {
    const auto q = selector_Q(net, cc.c_star);
    const auto f = opinion_rhs(w, net, kp);
    double numer = 0.0, q2 = 0.0, qf = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        numer += q[j] * (w[j] - cc.w_d);
        qf += q[j] * f[j];
        q2 += q[j] * q[j];
    }
    ControlDecision d;
    if (q2 == 0.0) {
        d.uncontrollable = true;
        return d;
    }
    d.raw = -(numer + cc.dt * qf) / (static_cast<double>(w.size()) * cc.nu + cc.dt * q2);
    d.u = cc.clamp(d.raw);
    return d;
}

/// Discrete horizon cost: p steps of the RK scheme, state sampled at the
/// end of each step, control piecewise constant:
///   J_p = dt sum_{k=1..p} 1/2 [ (1/N) sum (w^{n+k} - w_d)^2 + nu_p (u^{k-1})^2 ].
inline double horizon_cost(std::span<const double> w, const Network& net, const KernelParams& kp,
                           const ControlConfig& cc, const RKTableau& tab, std::span<const double> controls) {
    const auto q = selector_Q(net, cc.c_star);
    const double penalty = cc.horizon_penalty();
    std::vector<double> state(w.begin(), w.end());
    double j = 0.0;
    for (double u : controls) {
        state = step_opinions_rk(state, net, kp, q, u, tab, cc.dt);
        j += cc.dt * running_cost(state, u, cc.w_d, penalty);
    }
    return j;
}

struct MpcOptions {
    int max_iterations = 500;
    double gradient_tolerance = 1e-8;
    double step_tolerance = 1e-12; ///< relative Newton step that counts as stalled
    double gradient_fd_step = 1e-4;
    double hessian_fd_step = 1e-2;
    std::optional<std::vector<double>> initial_guess;
};

struct MpcResult {
    std::vector<double> controls;
    double cost = 0.0;
    int iterations = 0;
    bool converged = false;
    bool uncontrollable = false;
};

namespace detail {

// Cholesky solve of H x = r in place; false if H is not positive definite.
inline bool cholesky_solve(std::vector<std::vector<double>> h, std::vector<double>& r) {
    const std::size_t n = r.size();
    for (std::size_t j = 0; j < n; ++j) {
        double d = h[j][j];
        for (std::size_t k = 0; k < j; ++k) d -= h[j][k] * h[j][k];
        if (!(d > 0.0)) return false;
        h[j][j] = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = h[i][j];
            for (std::size_t k = 0; k < j; ++k) v -= h[i][k] * h[j][k];
            h[i][j] = v / h[j][j];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) r[i] -= h[i][k] * r[k];
        r[i] /= h[i][i];
    }
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t k = i + 1; k < n; ++k) r[i] -= h[k][i] * r[k];
        r[i] /= h[i][i];
    }
    return true;
}

} // namespace detail

/// Finite-horizon MPC: minimise horizon_cost over u in [-kappa, kappa]^p by
/// projected Newton iterations on finite-difference derivatives, with an
/// Armijo backtracking line search and a projected-gradient fallback.
/// Converged once the projected gradient norm is below the tolerance and
/// the Newton correction has stalled.
inline MpcResult mpc_control(std::span<const double> w, const Network& net, const KernelParams& kp,
                             const ControlConfig& cc, const RKTableau& tab, const MpcOptions& opt = {}) {
    cc.validate();
    tab.validate();
    const auto p = static_cast<std::size_t>(cc.horizon_p);
    MpcResult res;
    {
        const auto q = selector_Q(net, cc.c_star);
        res.uncontrollable = std::none_of(q.begin(), q.end(), [](double v) { return v != 0.0; });
    }

    std::vector<double> u(p, 0.0);
    if (opt.initial_guess) {
        if (opt.initial_guess->size() != p) throw std::invalid_argument("initial guess length != horizon_p");
        u = *opt.initial_guess;
    }
    for (double& v : u) v = cc.clamp(v);

    auto cost = [&](std::span<const double> x) { return horizon_cost(w, net, kp, cc, tab, x); };
    double j = cost(u);

    std::vector<double> grad(p), trial(p);
    for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
        for (std::size_t i = 0; i < p; ++i) {
            const double h = opt.gradient_fd_step * std::max(1.0, std::abs(u[i]));
            trial = u;
            trial[i] = u[i] + h;
            const double jp = cost(trial);
            trial[i] = u[i] - h;
            const double jm = cost(trial);
            grad[i] = (jp - jm) / (2.0 * h);
        }

        std::vector<std::size_t> free;
        double pg_norm = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            const bool at_lo = u[i] <= -cc.kappa && grad[i] > 0.0;
            const bool at_hi = u[i] >= cc.kappa && grad[i] < 0.0;
            if (at_lo || at_hi) continue;
            free.push_back(i);
            pg_norm += grad[i] * grad[i];
        }
        pg_norm = std::sqrt(pg_norm);
        if (pg_norm == 0.0) {
            res.converged = true;
            break;
        }

        // Newton direction on the free coordinates
        const std::size_t m = free.size();
        std::vector<std::vector<double>> hess(m, std::vector<double>(m));
        const double hh = opt.hessian_fd_step;
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = a; b < m; ++b) {
                const std::size_t ia = free[a], ib = free[b];
                auto eval = [&](double da, double db) {
                    trial = u;
                    trial[ia] += da;
                    trial[ib] += db;
                    return cost(trial);
                };
                double v;
                if (a == b) {
                    v = (eval(hh, 0.0) - 2.0 * j + eval(-hh, 0.0)) / (hh * hh);
                } else {
                    v = (eval(hh, hh) - eval(hh, -hh) - eval(-hh, hh) + eval(-hh, -hh)) / (4.0 * hh * hh);
                }
                hess[a][b] = hess[b][a] = v;
            }
        std::vector<double> dir(m);
        for (std::size_t a = 0; a < m; ++a) dir[a] = -grad[free[a]];
        if (!detail::cholesky_solve(hess, dir)) {
            double scale = 0.0;
            for (std::size_t a = 0; a < m; ++a) scale = std::max(scale, hess[a][a]);
            for (std::size_t a = 0; a < m; ++a) dir[a] = -grad[free[a]] / (scale > 0.0 ? scale : 1.0);
        }

        double dir_norm = 0.0, u_norm = 0.0;
        for (std::size_t a = 0; a < m; ++a) dir_norm = std::max(dir_norm, std::abs(dir[a]));
        for (double v : u) u_norm = std::max(u_norm, std::abs(v));
        if (pg_norm < opt.gradient_tolerance && dir_norm <= opt.step_tolerance * (1.0 + u_norm)) {
            res.converged = true;
            break;
        }

        bool accepted = false;
        for (double step = 1.0; step > 1e-12; step *= 0.5) {
            trial = u;
            for (std::size_t a = 0; a < m; ++a) trial[free[a]] = cc.clamp(u[free[a]] + step * dir[a]);
            double decrease = 0.0;
            for (std::size_t i = 0; i < p; ++i) decrease += grad[i] * (trial[i] - u[i]);
            const double jt = cost(trial);
            if (jt <= j + 1e-4 * decrease) {
                accepted = trial != u;
                u = trial;
                j = jt;
                break;
            }
        }
        if (!accepted) {
            // no descent left at finite-difference resolution
            res.converged = pg_norm < opt.gradient_tolerance;
            break;
        }
    }
    res.controls = u;
    res.cost = j;
    return res;
}

} // namespace opnet
