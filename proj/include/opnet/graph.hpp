#pragma once

// Evolving undirected network with a fixed number of nodes and edges, and
// the preferential-attachment rewiring process that drives it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "opnet/random.hpp"

namespace opnet {

using NodeId = std::uint32_t;

struct Edge {
    NodeId a = 0;
    NodeId b = 0;

    /// Same unordered pair.
    bool same_pair(const Edge& o) const {
        return (a == o.a && b == o.b) || (a == o.b && b == o.a);
    }
    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Which edges rewiring may create. pseudograph draws both endpoints
/// independently (parallel edges and self-loops allowed), multigraph
/// rejects self-loops, simple also rejects parallel edges.
enum class EdgePolicy { pseudograph, multigraph, simple };

/// Largest degree a node can reach: a self-loop counts twice.
inline std::size_t degree_bound(EdgePolicy policy, std::size_t n_edges) {
    return policy == EdgePolicy::pseudograph ? 2 * n_edges : n_edges;
}

enum class InitMode { uniform_random, uniform_degree };

enum class StepOutcome {
    rewired,   ///< a different pair was connected
    identical, ///< the removed pair was drawn again
    restored   ///< no admissible pair found, removed edge put back
};

class GraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RewireParams {
    double alpha = 0.01; ///< attraction coefficient
    double d_rate = 1.0; ///< rewiring events per unit time

    void validate() const {
        if (!(alpha > 0.0) || !std::isfinite(alpha))
            throw GraphError("alpha must be positive and finite");
        if (!(d_rate > 0.0) || !std::isfinite(d_rate))
            throw GraphError("d_rate must be positive and finite");
    }
};

class Network {
public:
    /// Per-node neighbour multiplicities, ordered by neighbour id.
    using Neighbourhood = std::map<NodeId, int>;

    explicit Network(std::size_t n_nodes, EdgePolicy policy = EdgePolicy::pseudograph)
        : policy_(policy), degrees_(n_nodes, 0), adjacency_(n_nodes) {
        if (n_nodes == 0) throw GraphError("network needs at least one node");
    }

    static Network from_edges(std::size_t n_nodes, std::span<const Edge> edges,
                              EdgePolicy policy = EdgePolicy::pseudograph) {
        Network net(n_nodes, policy);
        for (const Edge& e : edges) net.add_edge(e.a, e.b);
        return net;
    }

    std::size_t n_nodes() const { return degrees_.size(); }
    std::size_t n_edges() const { return edges_.size(); }
    EdgePolicy policy() const { return policy_; }

    /// Density of connectivity 2E/N.
    double density() const {
        return 2.0 * static_cast<double>(n_edges()) / static_cast<double>(n_nodes());
    }

    std::span<const int> degrees() const { return degrees_; }
    int degree(NodeId i) const { return degrees_.at(i); }
    std::span<const Edge> edges() const { return edges_; }
    const Neighbourhood& neighbours(NodeId i) const { return adjacency_.at(i); }

    int multiplicity(NodeId i, NodeId j) const {
        const auto& nb = adjacency_.at(i);
        auto it = nb.find(j);
        return it == nb.end() ? 0 : it->second;
    }
    bool has_edge(NodeId i, NodeId j) const { return multiplicity(i, j) > 0; }

    /// Node at endpoint slot `idx` in [0, 2E): edge idx/2, side idx%2.
    NodeId endpoint(std::uint64_t idx) const {
        const Edge& e = edges_[idx / 2];
        return (idx % 2 == 0) ? e.a : e.b;
    }

    /// Whether {i, j} may be added under the current policy.
    bool admissible(NodeId i, NodeId j) const {
        if (policy_ == EdgePolicy::pseudograph) return true;
        if (i == j) return false;
        return policy_ == EdgePolicy::multigraph || !has_edge(i, j);
    }

    void add_edge(NodeId i, NodeId j) {
        check_node(i);
        check_node(j);
        if (!admissible(i, j))
            throw GraphError("edge {" + std::to_string(i) + "," + std::to_string(j) +
                             "} not admissible under the edge policy");
        edges_.push_back(Edge{std::min(i, j), std::max(i, j)});
        attach(i, j);
    }

    /// Detach the edge in `slot`. The last edge moves into `slot` until the
    /// matching put_edge call restores the ordering.
    Edge take_edge(std::size_t slot) {
        if (slot >= edges_.size()) throw GraphError("edge slot out of range");
        std::swap(edges_[slot], edges_.back());
        Edge e = edges_.back();
        edges_.pop_back();
        detach(e.a, e.b);
        return e;
    }

    /// Inverse of take_edge: insert `e` back at `slot`.
    void put_edge(std::size_t slot, Edge e) {
        if (slot > edges_.size()) throw GraphError("edge slot out of range");
        if (!admissible(e.a, e.b)) throw GraphError("put_edge: edge not admissible");
        edges_.push_back(Edge{std::min(e.a, e.b), std::max(e.a, e.b)});
        std::swap(edges_[slot], edges_.back());
        attach(e.a, e.b);
    }

    /// Recompute degrees from the edge list and adjacency and compare.
    void validate() const {
        std::vector<int> from_edges(n_nodes(), 0);
        std::map<std::pair<NodeId, NodeId>, int> counts;
        for (const Edge& e : edges_) {
            if (e.a == e.b && policy_ != EdgePolicy::pseudograph) throw GraphError("self-loop in edge list");
            if (e.a >= n_nodes() || e.b >= n_nodes()) throw GraphError("edge endpoint out of range");
            ++from_edges[e.a];
            ++from_edges[e.b];
            int c = ++counts[{std::min(e.a, e.b), std::max(e.a, e.b)}];
            if (policy_ == EdgePolicy::simple && c > 1) throw GraphError("duplicate edge in simple graph");
        }
        long long total = 0;
        for (std::size_t i = 0; i < n_nodes(); ++i) {
            int adj = 0;
            for (const auto& [j, m] : adjacency_[i]) {
                if (m <= 0) throw GraphError("non-positive multiplicity");
                if (multiplicity(j, static_cast<NodeId>(i)) != m) throw GraphError("asymmetric adjacency");
                adj += m;
            }
            if (adj != degrees_[i] || from_edges[i] != degrees_[i])
                throw GraphError("degree mismatch at node " + std::to_string(i));
            total += degrees_[i];
        }
        if (total != 2 * static_cast<long long>(n_edges())) throw GraphError("degree sum != 2E");
    }

private:
    void check_node(NodeId i) const {
        if (i >= n_nodes()) throw GraphError("node id " + std::to_string(i) + " out of range");
    }
    void attach(NodeId i, NodeId j) {
        ++adjacency_[i][j];
        ++adjacency_[j][i];
        ++degrees_[i];
        ++degrees_[j];
    }
    void detach(NodeId i, NodeId j) {
        for (auto [x, y] : {std::pair{i, j}, std::pair{j, i}}) {
            auto it = adjacency_[x].find(y);
            if (--it->second == 0) adjacency_[x].erase(it);
        }
        --degrees_[i];
        --degrees_[j];
    }

    EdgePolicy policy_;
    std::vector<Edge> edges_;
    std::vector<int> degrees_;
    std::vector<Neighbourhood> adjacency_;
};

/// Selection probabilities (c_i + alpha) / (2E + N alpha).
inline std::vector<double> attachment_probabilities(const Network& net, double alpha) {
    if (!(alpha > 0.0)) throw GraphError("alpha must be positive");
    const double denom = 2.0 * static_cast<double>(net.n_edges()) +
                         static_cast<double>(net.n_nodes()) * alpha;
    std::vector<double> pi(net.n_nodes());
    for (std::size_t i = 0; i < pi.size(); ++i) pi[i] = (net.degree(static_cast<NodeId>(i)) + alpha) / denom;
    return pi;
}

/// Draw a node with probability (c_i + alpha) / (2E + N alpha).
///
/// The law is sampled as a mixture: with weight 2E a uniformly chosen edge
/// endpoint (which hits node i with probability c_i / 2E), with weight N alpha
/// a uniformly chosen node.
inline NodeId sample_node_preferential(const Network& net, double alpha, Rng& rng) {
    const auto stubs = 2 * static_cast<std::uint64_t>(net.n_edges());
    const double uniform_weight = static_cast<double>(net.n_nodes()) * alpha;
    const double u = rng.uniform01() * (static_cast<double>(stubs) + uniform_weight);
    if (u < static_cast<double>(stubs)) return net.endpoint(rng.uniform_index(stubs));
    return static_cast<NodeId>(rng.uniform_index(net.n_nodes()));
}

/// One rewiring event: remove a uniform edge, then connect two nodes drawn
/// by preferential attachment on the post-removal degrees. The second node
/// is redrawn until the pair is admissible; after 100 N failures the
/// removed edge is restored.
inline StepOutcome rewire_step(Network& net, double alpha, Rng& rng) {
    if (net.n_edges() < 1) throw GraphError("rewire_step needs at least one edge");
    if (net.n_nodes() < 2) throw GraphError("rewire_step needs at least two nodes");

    const auto slot = static_cast<std::size_t>(rng.uniform_index(net.n_edges()));
    const Edge removed = net.take_edge(slot);

    const NodeId first = sample_node_preferential(net, alpha, rng);
    const std::size_t max_tries = 100 * net.n_nodes();
    for (std::size_t t = 0; t < max_tries; ++t) {
        const NodeId second = sample_node_preferential(net, alpha, rng);
        if (!net.admissible(first, second)) continue;
        const Edge added{first, second};
        net.put_edge(slot, added);
        return added.same_pair(removed) ? StepOutcome::identical : StepOutcome::rewired;
    }
    net.put_edge(slot, removed);
    return StepOutcome::restored;
}

struct EvolveStats {
    std::uint64_t steps = 0;
    std::uint64_t restored = 0;
};

/// Advance the network over an interval of length dt: Poisson(D dt) events.
inline EvolveStats evolve_network(Network& net, const RewireParams& params, double dt, Rng& rng) {
    if (!(dt >= 0.0)) throw GraphError("dt must be non-negative");
    EvolveStats stats;
    stats.steps = rng.poisson(params.d_rate * dt);
    for (std::uint64_t k = 0; k < stats.steps; ++k)
        if (rewire_step(net, params.alpha, rng) == StepOutcome::restored) ++stats.restored;
    return stats;
}

/// Edge count n gamma / 2, validated to be a positive integer.
inline std::size_t edge_count_for(std::size_t n, double gamma) {
    const double e = static_cast<double>(n) * gamma / 2.0;
    const double rounded = std::round(e);
    if (!(gamma > 0.0) || std::abs(e - rounded) > 1e-9 || rounded < 1.0)
        throw GraphError("n * gamma / 2 must be a positive integer (n=" + std::to_string(n) +
                         ", gamma=" + std::to_string(gamma) + ")");
    const double max_pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
    if (rounded > max_pairs)
        throw GraphError("edge count exceeds n(n-1)/2; no simple graph exists");
    return static_cast<std::size_t>(rounded);
}

namespace detail {

inline std::uint64_t pair_code(NodeId a, NodeId b, std::size_t n) {
    if (a > b) std::swap(a, b);
    return static_cast<std::uint64_t>(a) * n + b;
}

inline std::vector<Edge> random_simple_edges(std::size_t n, std::size_t e, Rng& rng) {
    const std::uint64_t pairs = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    std::vector<Edge> out;
    out.reserve(e);
    if (2 * e <= pairs) {
        std::set<std::uint64_t> seen;
        while (out.size() < e) {
            auto a = static_cast<NodeId>(rng.uniform_index(n));
            auto b = static_cast<NodeId>(rng.uniform_index(n));
            if (a == b || !seen.insert(pair_code(a, b, n)).second) continue;
            out.push_back(Edge{std::min(a, b), std::max(a, b)});
        }
        return out;
    }
    // dense: partial Fisher-Yates over all pairs
    std::vector<Edge> all;
    all.reserve(pairs);
    for (NodeId a = 0; a < n; ++a)
        for (NodeId b = a + 1; b < n; ++b) all.push_back(Edge{a, b});
    for (std::size_t k = 0; k < e; ++k) {
        auto pick = k + static_cast<std::size_t>(rng.uniform_index(all.size() - k));
        std::swap(all[k], all[pick]);
    }
    all.resize(e);
    return all;
}

inline std::vector<Edge> random_regular_edges(std::size_t n, int d, Rng& rng) {
    std::vector<Edge> edges;
    for (NodeId i = 0; i < n; ++i)
        for (int k = 1; k <= d / 2; ++k) {
            auto j = static_cast<NodeId>((i + static_cast<std::size_t>(k)) % n);
            edges.push_back(Edge{std::min(i, j), std::max(i, j)});
        }
    if (d % 2 == 1)
        for (NodeId i = 0; i < n / 2; ++i) edges.push_back(Edge{i, static_cast<NodeId>(i + n / 2)});

    std::set<std::uint64_t> present;
    for (const Edge& e : edges) present.insert(pair_code(e.a, e.b, n));

    // degree-preserving double-edge swaps
    const std::size_t swaps = 10 * edges.size();
    for (std::size_t s = 0; s < swaps && edges.size() >= 2; ++s) {
        auto x = static_cast<std::size_t>(rng.uniform_index(edges.size()));
        auto y = static_cast<std::size_t>(rng.uniform_index(edges.size()));
        if (x == y) continue;
        Edge e1 = edges[x];
        Edge e2 = edges[y];
        if (rng.uniform_index(2) == 1) std::swap(e2.a, e2.b);
        const Edge n1{e1.a, e2.b};
        const Edge n2{e2.a, e1.b};
        if (n1.a == n1.b || n2.a == n2.b) continue;
        const auto c1 = pair_code(n1.a, n1.b, n);
        const auto c2 = pair_code(n2.a, n2.b, n);
        if (c1 == c2 || present.count(c1) || present.count(c2)) continue;
        present.erase(pair_code(e1.a, e1.b, n));
        present.erase(pair_code(e2.a, e2.b, n));
        present.insert(c1);
        present.insert(c2);
        edges[x] = Edge{std::min(n1.a, n1.b), std::max(n1.a, n1.b)};
        edges[y] = Edge{std::min(n2.a, n2.b), std::max(n2.a, n2.b)};
    }
    return edges;
}

} // namespace detail

/// Random initial network with E = n gamma / 2 edges. The initial graph is
/// always simple; `policy` governs later rewiring.
///
/// uniform_random draws E distinct pairs uniformly. uniform_degree gives
/// every node degree gamma: a circulant regular graph randomised by 10 E
/// degree-preserving double-edge swaps.
inline Network init_network(std::size_t n, double gamma, InitMode mode, Rng& rng,
                            EdgePolicy policy = EdgePolicy::pseudograph) {
    if (n < 2) throw GraphError("init_network needs at least two nodes");
    const std::size_t e = edge_count_for(n, gamma);
    std::vector<Edge> edges;
    if (mode == InitMode::uniform_random) {
        edges = detail::random_simple_edges(n, e, rng);
    } else {
        const double d = std::round(gamma);
        if (std::abs(gamma - d) > 1e-12)
            throw GraphError("uniform_degree needs an integer gamma");
        edges = detail::random_regular_edges(n, static_cast<int>(d), rng);
    }
    Network net(n, EdgePolicy::simple);
    for (const Edge& ed : edges) net.add_edge(ed.a, ed.b);
    if (policy == EdgePolicy::simple) return net;
    return Network::from_edges(n, net.edges(), policy);
}

} // namespace opnet
