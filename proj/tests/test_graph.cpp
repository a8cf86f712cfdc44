#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "opnet/graph.hpp"

using namespace opnet;

namespace {

Network star(std::size_t leaves, EdgePolicy policy) {
    Network net(leaves + 1, policy);
    for (NodeId j = 1; j <= leaves; ++j) net.add_edge(0, j);
    return net;
}

} // namespace

TEST(Attachment, SymmetricPairIsUniform) {
    Network net(2);
    net.add_edge(0, 1);
    const auto pi = attachment_probabilities(net, 1.0);
    EXPECT_DOUBLE_EQ(pi[0], 0.5);
    EXPECT_DOUBLE_EQ(pi[1], 0.5);
}

TEST(Attachment, HandEvaluatedDegrees31) {
    // degrees [3, 1] with E = 2: a self-loop on node 0 plus the edge {0,1}
    Network net(2);
    net.add_edge(0, 0);
    net.add_edge(0, 1);
    ASSERT_EQ(net.degree(0), 3);
    ASSERT_EQ(net.degree(1), 1);
    const auto pi = attachment_probabilities(net, 0.01);
    EXPECT_NEAR(pi[0], 0.748756, 1e-6);
    EXPECT_NEAR(pi[1], 0.251244, 1e-6);
    EXPECT_NEAR(pi[0], 3.01 / 4.02, 1e-15);
}

TEST(Attachment, LargeAlphaApproachesUniformMonotonically) {
    Rng rng(7);
    Network net = init_network(30, 4, InitMode::uniform_random, rng);
    double prev = 1.0;
    for (double alpha : {0.01, 1.0, 100.0, 1e4, 1e6}) {
        const auto pi = attachment_probabilities(net, alpha);
        double dev = 0.0;
        for (double p : pi) dev = std::max(dev, std::abs(p - 1.0 / 30.0));
        EXPECT_LT(dev, prev);
        prev = dev;
    }
    EXPECT_LT(prev, 1e-6);
}

TEST(Attachment, SumsToOneAndMonotoneInDegree) {
    Rng rng(11);
    Network net = init_network(50, 6, InitMode::uniform_random, rng);
    for (int k = 0; k < 2000; ++k) rewire_step(net, 0.3, rng);
    const auto pi = attachment_probabilities(net, 0.3);
    EXPECT_NEAR(std::accumulate(pi.begin(), pi.end(), 0.0), 1.0, 1e-12);
    for (NodeId i = 0; i < 50; ++i)
        for (NodeId j = 0; j < 50; ++j)
            if (net.degree(i) < net.degree(j)) {
                EXPECT_LT(pi[i], pi[j]);
            }
}

TEST(Sampling, SymmetricPairFrequency) {
    Network net(2);
    net.add_edge(0, 1);
    Rng rng(1);
    int hits = 0;
    const int draws = 100000;
    for (int k = 0; k < draws; ++k) hits += sample_node_preferential(net, 0.01, rng) == 0;
    const double f = static_cast<double>(hits) / draws;
    EXPECT_GE(f, 0.49);
    EXPECT_LE(f, 0.51);
}

TEST(Sampling, FrequencyMatchesSelectionLaw) {
    Network net(2);
    net.add_edge(0, 0);
    net.add_edge(0, 1);
    Rng rng(2);
    int hits = 0;
    const int draws = 100000;
    for (int k = 0; k < draws; ++k) hits += sample_node_preferential(net, 0.01, rng) == 0;
    EXPECT_NEAR(static_cast<double>(hits) / draws, 0.748756, 0.01);
}

TEST(Sampling, SingleNodeAlwaysChosen) {
    Network net(1);
    Rng rng(3);
    for (int k = 0; k < 100; ++k) EXPECT_EQ(sample_node_preferential(net, 0.5, rng), 0u);
}

TEST(Rewire, TwoNodeSimpleGraphIsUnchanged) {
    Network net(2, EdgePolicy::simple);
    net.add_edge(0, 1);
    Rng rng(4);
    for (int k = 0; k < 50; ++k) {
        const auto out = rewire_step(net, 0.01, rng);
        EXPECT_TRUE(out == StepOutcome::identical || out == StepOutcome::restored);
        ASSERT_EQ(net.n_edges(), 1u);
        EXPECT_TRUE(net.has_edge(0, 1));
    }
}

// Probability that the hub of K_{1,9} is an endpoint of the new edge, by
// enumeration over removed edge and ordered endpoint pairs.
double hub_probability_by_enumeration(EdgePolicy policy, double alpha) {
    const std::size_t n = 10;
    double total = 0.0;
    for (NodeId removed = 1; removed <= 9; ++removed) {
        std::vector<double> deg(n, 1.0);
        deg[0] = 8.0;
        deg[removed] = 0.0;
        double denom = 0.0;
        for (double c : deg) denom += c + alpha;
        std::vector<double> pi(n);
        for (std::size_t i = 0; i < n; ++i) pi[i] = (deg[i] + alpha) / denom;
        double p_hub = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            // admissible partners of i after the removal
            auto ok = [&](std::size_t j) {
                if (policy == EdgePolicy::pseudograph) return true;
                if (i == j) return false;
                if (policy == EdgePolicy::multigraph) return true;
                const bool adjacent = (i == 0 && j != removed && j != 0) || (j == 0 && i != removed && i != 0);
                return !adjacent;
            };
            double mass = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                if (ok(j)) mass += pi[j];
            if (mass == 0.0) {
                if (i == 0 || removed == 0) p_hub += pi[i]; // restored edge touches the hub
                continue;
            }
            for (std::size_t j = 0; j < n; ++j)
                if (ok(j) && (i == 0 || j == 0)) p_hub += pi[i] * pi[j] / mass;
        }
        total += p_hub / 9.0;
    }
    return total;
}

class StarRewire : public ::testing::TestWithParam<EdgePolicy> {};

TEST_P(StarRewire, HubEndpointFrequencyMatchesEnumeration) {
    const EdgePolicy policy = GetParam();
    const double alpha = 0.01;
    const double expected = hub_probability_by_enumeration(policy, alpha);
    const Network base = star(9, policy);
    Rng rng(5);
    const int trials = 100000;
    int hits = 0;
    for (int k = 0; k < trials; ++k) {
        Network net = base;
        rewire_step(net, alpha, rng);
        // the hub had degree 8 after removal; it is an endpoint iff it regained degree
        hits += net.degree(0) > 8;
    }
    const double f = static_cast<double>(hits) / trials;
    const double sd = std::sqrt(expected * (1.0 - expected) / trials);
    EXPECT_NEAR(f, expected, 5.0 * sd) << "enumerated " << expected;
}

INSTANTIATE_TEST_SUITE_P(Policies, StarRewire,
                         ::testing::Values(EdgePolicy::pseudograph, EdgePolicy::multigraph, EdgePolicy::simple));

class RewireInvariants : public ::testing::TestWithParam<EdgePolicy> {};

TEST_P(RewireInvariants, ConservationAndBoundedDegreeChange) {
    const EdgePolicy policy = GetParam();
    Rng rng(6);
    Network net = init_network(40, 6, InitMode::uniform_random, rng, policy);
    const std::size_t e = net.n_edges();
    for (int k = 0; k < 5000; ++k) {
        const std::vector<int> before(net.degrees().begin(), net.degrees().end());
        rewire_step(net, 0.05, rng);
        ASSERT_EQ(net.n_nodes(), 40u);
        ASSERT_EQ(net.n_edges(), e);
        int down = 0, up = 0, sum = 0;
        for (std::size_t i = 0; i < before.size(); ++i) {
            const int d = net.degree(static_cast<NodeId>(i)) - before[i];
            sum += d;
            if (d < 0) down -= d;
            if (d > 0) up += d;
        }
        ASSERT_EQ(sum, 0);
        ASSERT_LE(down, 2);
        ASSERT_LE(up, 2);
        if (k % 250 == 0) {
            ASSERT_NO_THROW(net.validate());
        }
    }
    net.validate();
    const auto deg = net.degrees();
    EXPECT_EQ(std::accumulate(deg.begin(), deg.end(), 0), static_cast<int>(2 * e));
    if (policy == EdgePolicy::simple) {
        for (const Edge& ed : net.edges()) {
            EXPECT_NE(ed.a, ed.b);
            EXPECT_EQ(net.multiplicity(ed.a, ed.b), 1);
        }
    }
    if (policy == EdgePolicy::multigraph) {
        for (const Edge& ed : net.edges()) EXPECT_NE(ed.a, ed.b);
    }
}

INSTANTIATE_TEST_SUITE_P(Policies, RewireInvariants,
                         ::testing::Values(EdgePolicy::pseudograph, EdgePolicy::multigraph, EdgePolicy::simple));

TEST(Rewire, SameSeedSameTrajectory) {
    auto run = [] {
        Rng rng(99);
        Network net = init_network(60, 4, InitMode::uniform_degree, rng);
        evolve_network(net, RewireParams{0.01, 5.0}, 200.0, rng);
        return std::vector<Edge>(net.edges().begin(), net.edges().end());
    };
    EXPECT_EQ(run(), run());
}

TEST(Rewire, SelfLoopCountsTwice) {
    Network net(3);
    net.add_edge(1, 1);
    EXPECT_EQ(net.degree(1), 2);
    EXPECT_EQ(net.multiplicity(1, 1), 2);
    net.validate();
    Network strict(3, EdgePolicy::multigraph);
    EXPECT_THROW(strict.add_edge(1, 1), GraphError);
    Network simple(3, EdgePolicy::simple);
    simple.add_edge(0, 1);
    EXPECT_THROW(simple.add_edge(1, 0), GraphError);
}

TEST(Evolve, ZeroIntervalDoesNothing) {
    Rng rng(8);
    Network net = init_network(20, 4, InitMode::uniform_random, rng);
    const std::vector<Edge> before(net.edges().begin(), net.edges().end());
    const auto st = evolve_network(net, RewireParams{0.01, 20.0}, 0.0, rng);
    EXPECT_EQ(st.steps, 0u);
    EXPECT_EQ(std::vector<Edge>(net.edges().begin(), net.edges().end()), before);
}

TEST(Evolve, EventCountHasPoissonMean) {
    Rng rng(9);
    Network net = init_network(50, 4, InitMode::uniform_random, rng);
    const RewireParams rp{0.01, 20.0};
    std::uint64_t total = 0;
    double sq = 0.0;
    const int intervals = 10000;
    for (int k = 0; k < intervals; ++k) {
        const auto n = evolve_network(net, rp, 0.05, rng).steps;
        total += n;
        sq += static_cast<double>(n * n);
    }
    const double mean = static_cast<double>(total) / intervals;
    EXPECT_NEAR(mean, 1.0, 0.02);
    EXPECT_NEAR(sq / intervals - mean * mean, 1.0, 0.06); // Poisson: variance = mean
}

TEST(Init, K4IsComplete) {
    for (auto mode : {InitMode::uniform_random, InitMode::uniform_degree}) {
        Rng rng(10);
        Network net = init_network(4, 3, mode, rng);
        EXPECT_EQ(net.n_edges(), 6u);
        for (NodeId i = 0; i < 4; ++i)
            for (NodeId j = i + 1; j < 4; ++j) EXPECT_EQ(net.multiplicity(i, j), 1);
    }
}

TEST(Init, UniformDegreeIsRegular) {
    Rng rng(12);
    Network net = init_network(100, 30, InitMode::uniform_degree, rng);
    EXPECT_EQ(net.n_edges(), 1500u);
    for (int c : net.degrees()) EXPECT_EQ(c, 30);
    Network simple = Network::from_edges(100, net.edges(), EdgePolicy::simple);
    simple.validate();
}

TEST(Init, OddDegreeRegular) {
    Rng rng(13);
    Network net = init_network(20, 5, InitMode::uniform_degree, rng);
    EXPECT_EQ(net.n_edges(), 50u);
    for (int c : net.degrees()) EXPECT_EQ(c, 5);
}

TEST(Init, UniformRandomEdgeCount) {
    Rng rng(14);
    Network net = init_network(20, 5, InitMode::uniform_random, rng);
    EXPECT_EQ(net.n_edges(), 50u);
    Network::from_edges(20, net.edges(), EdgePolicy::simple).validate();
}

TEST(Init, RejectsImpossibleDensities) {
    Rng rng(15);
    EXPECT_THROW(init_network(5, 3, InitMode::uniform_random, rng), GraphError);  // 7.5 edges
    EXPECT_THROW(init_network(4, 4, InitMode::uniform_random, rng), GraphError);  // more than K4
    EXPECT_THROW(init_network(10, 2.5, InitMode::uniform_degree, rng), GraphError);
}

TEST(Network, TakeAndPutRestoreOrder) {
    Network net(5);
    net.add_edge(0, 1);
    net.add_edge(1, 2);
    net.add_edge(2, 3);
    const std::vector<Edge> before(net.edges().begin(), net.edges().end());
    const Edge e = net.take_edge(0);
    EXPECT_EQ(net.n_edges(), 2u);
    net.put_edge(0, e);
    EXPECT_EQ(std::vector<Edge>(net.edges().begin(), net.edges().end()), before);
    net.validate();
}
