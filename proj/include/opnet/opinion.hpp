#pragma once

// Opinion alignment on the current network: bounded-confidence kernel H,
// degree kernel K and the averaged right-hand side F.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "opnet/graph.hpp"

namespace opnet {

struct OpinionState {
    std::vector<double> w;
    double time = 0.0;
};

struct KernelParams {
    double lambda = 0.01; ///< hub resistance to influence
    double beta = 1.0;    ///< hub influence saturation
    double delta = 0.4;   ///< confidence bound

    void validate() const {
        for (double v : {lambda, beta, delta})
            if (!(v >= 0.0) || !std::isfinite(v))
                throw std::invalid_argument("kernel parameters must be finite and non-negative");
    }

    friend bool operator==(const KernelParams&, const KernelParams&) = default;
};

/// 1 if |wi - wj| <= delta (closed bound), else 0.
inline double kernel_H(double wi, double wj, double delta) { return std::abs(wi - wj) <= delta ? 1.0 : 0.0; }

/// e^{-lambda ci} (1 - e^{-beta cj}).
inline double kernel_K(int ci, int cj, const KernelParams& kp) {
    return std::exp(-kp.lambda * ci) * -std::expm1(-kp.beta * cj);
}

inline double interaction_P(double wi, double wj, int ci, int cj, const KernelParams& kp) {
    if (kernel_H(wi, wj, kp.delta) == 0.0) return 0.0;
    return kernel_K(ci, cj, kp);
}

/// F_i = (1/c_i) sum_{j ~ i} P_ij (w_j - w_i), with parallel edges counted
/// by multiplicity. Isolated nodes get F_i = 0.
inline std::vector<double> opinion_rhs(std::span<const double> w, const Network& net, const KernelParams& kp) {
    const std::size_t n = net.n_nodes();
    if (w.size() != n) throw std::invalid_argument("opinion vector length differs from node count");
    const auto deg = net.degrees();

    std::vector<double> resist(n), pull(n);
    for (std::size_t i = 0; i < n; ++i) {
        resist[i] = std::exp(-kp.lambda * deg[i]);
        pull[i] = -std::expm1(-kp.beta * deg[i]);
    }

    std::vector<double> f(n, 0.0);
    for (const Edge& e : net.edges()) {
        const double d = w[e.b] - w[e.a];
        if (!(std::abs(d) <= kp.delta)) continue;
        f[e.a] += resist[e.a] * pull[e.b] * d;
        f[e.b] += resist[e.b] * pull[e.a] * -d;
    }
    for (std::size_t i = 0; i < n; ++i) f[i] = deg[i] > 0 ? f[i] / deg[i] : 0.0;
    return f;
}

inline std::vector<double> opinion_rhs(const OpinionState& s, const Network& net, const KernelParams& kp) {
    return opinion_rhs(std::span<const double>(s.w), net, kp);
}

} // namespace opnet
