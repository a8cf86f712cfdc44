#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "opnet/control.hpp"

using namespace opnet;

namespace {

struct Instance {
    Network net;
    std::vector<double> w;
    KernelParams kp;
    ControlConfig cc;
};

Instance random_instance(std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t n = 2 * (2 + rng.uniform_index(24)); // even, 4..50
    const double gamma = static_cast<double>(2 + rng.uniform_index(3));
    Network net = init_network(n, gamma, InitMode::uniform_random, rng);
    for (int k = 0; k < 200; ++k) rewire_step(net, 0.05, rng);
    std::vector<double> w(n);
    for (double& x : w) x = rng.uniform(-1, 1);
    KernelParams kp{rng.uniform(0, 0.05), rng.uniform(0.5, 2), rng.uniform(0.2, 1)};
    ControlConfig cc;
    cc.w_d = rng.uniform(-1, 1);
    cc.nu = rng.uniform(0.01, 2);
    cc.kappa = unbounded;
    cc.c_star = static_cast<int>(rng.uniform_index(5));
    cc.dt = rng.uniform(1e-3, 0.1);
    return {std::move(net), std::move(w), kp, cc};
}

} // namespace

TEST(Selector, Examples) {
    Network net(3);
    net.add_edge(0, 2);
    net.add_edge(0, 2);
    net.add_edge(0, 1);
    net.add_edge(2, 2);
    ASSERT_EQ(net.degree(0), 3);
    ASSERT_EQ(net.degree(1), 1);
    ASSERT_EQ(net.degree(2), 4);
    EXPECT_EQ(selector_Q(net, 4), (std::vector<double>{0, 0, 1}));
    EXPECT_EQ(selector_Q(net, 0), (std::vector<double>{1, 1, 1}));

    Rng rng(1);
    Network reg = init_network(100, 30, InitMode::uniform_degree, rng);
    const auto all = selector_Q(reg, 30);
    const auto none = selector_Q(reg, 31);
    EXPECT_TRUE(std::all_of(all.begin(), all.end(), [](double q) { return q == 1.0; }));
    EXPECT_TRUE(std::all_of(none.begin(), none.end(), [](double q) { return q == 0.0; }));
}

TEST(RunningCost, HandValues) {
    EXPECT_DOUBLE_EQ(running_cost(std::vector<double>{0.8, 0.8}, 0.0, 0.8, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(running_cost(std::vector<double>{0.0, 0.0}, 0.0, 0.8, 1.0), 0.32);
    const std::vector<double> w{0.1, -0.3, 0.5};
    for (double nu : {0.0, 0.5, 3.0})
        EXPECT_NEAR(running_cost(w, 0.7, 0.2, nu) - running_cost(w, 0.0, 0.2, nu), 0.5 * nu * 0.49, 1e-15);
}

TEST(Instantaneous, SingleAgentReachesTargetInOneStep) {
    Network net(1);
    ControlConfig cc;
    cc.w_d = 0.8;
    cc.nu = 0.0;
    cc.dt = 0.05;
    cc.kappa = unbounded;
    cc.c_star = 0;
    const std::vector<double> w{0.0};
    const auto d = instantaneous_control(w, net, KernelParams{}, cc);
    EXPECT_DOUBLE_EQ(d.u, 16.0);
    const auto next = step_opinions_rk(w, net, KernelParams{}, selector_Q(net, 0), d.u, RKTableau::explicit_euler(),
                                       cc.dt);
    EXPECT_LT(std::abs(next[0] - 0.8), 1e-12);

    cc.kappa = 0.1;
    const auto c = instantaneous_control(w, net, KernelParams{}, cc);
    EXPECT_DOUBLE_EQ(c.u, 0.1);
    EXPECT_DOUBLE_EQ(c.raw, 16.0);
}

TEST(Instantaneous, ZeroAtTarget) {
    Rng rng(2);
    Network net = init_network(20, 4, InitMode::uniform_random, rng);
    ControlConfig cc;
    cc.c_star = 0;
    const auto d = instantaneous_control(std::vector<double>(20, cc.w_d), net, KernelParams{}, cc);
    EXPECT_EQ(d.u, 0.0);
    EXPECT_FALSE(d.uncontrollable);
}

TEST(Instantaneous, UncontrollableWhenNoNodeQualifies) {
    Rng rng(3);
    Network net = init_network(20, 4, InitMode::uniform_degree, rng);
    ControlConfig cc;
    cc.c_star = 5;
    const auto d = instantaneous_control(std::vector<double>(20, -0.5), net, KernelParams{}, cc);
    EXPECT_EQ(d.u, 0.0);
    EXPECT_TRUE(d.uncontrollable);
}

TEST(Instantaneous, SignFollowsOffset) {
    Network net(6); // no edges: F = 0
    ControlConfig cc;
    cc.c_star = 0;
    cc.kappa = unbounded;
    cc.w_d = 0.1;
    EXPECT_LT(instantaneous_control(std::vector<double>(6, 0.5), net, KernelParams{}, cc).u, 0.0);
    EXPECT_GT(instantaneous_control(std::vector<double>(6, -0.5), net, KernelParams{}, cc).u, 0.0);
}

TEST(Instantaneous, StationaryPointOfOneStepCost) {
    const RKTableau euler = RKTableau::explicit_euler();
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const Instance in = random_instance(seed);
        const auto d = instantaneous_control(in.w, in.net, in.kp, in.cc);
        if (d.uncontrollable) continue;
        auto j = [&](double u) {
            const double v[] = {u};
            return horizon_cost(in.w, in.net, in.kp, in.cc, euler, v);
        };
        const double h = 1e-4 * std::max(1.0, std::abs(d.raw));
        const double grad = (j(d.raw + h) - j(d.raw - h)) / (2 * h);
        EXPECT_LT(std::abs(grad), 1e-8 * (1 + std::abs(j(d.raw)))) << "seed " << seed;
    }
}

TEST(Instantaneous, ClampedAndTranslationInvariant) {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        Instance in = random_instance(seed);
        in.cc.kappa = 0.05;
        const double u = instantaneous_control(in.w, in.net, in.kp, in.cc).u;
        EXPECT_LE(std::abs(u), 0.05);
        in.cc.kappa = unbounded;
        const double raw = instantaneous_control(in.w, in.net, in.kp, in.cc).u;
        for (double& x : in.w) x += 0.3;
        in.cc.w_d += 0.3;
        EXPECT_NEAR(instantaneous_control(in.w, in.net, in.kp, in.cc).u, raw, 1e-12 * (1 + std::abs(raw)));
    }
}

TEST(Mpc, OneStepEulerMatchesClosedForm) {
    const RKTableau euler = RKTableau::explicit_euler();
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        Instance in = random_instance(seed);
        in.cc.horizon_p = 1;
        const auto d = instantaneous_control(in.w, in.net, in.kp, in.cc);
        const auto r = mpc_control(in.w, in.net, in.kp, in.cc, euler);
        EXPECT_NEAR(r.controls[0], d.u, 1e-8) << "seed " << seed;
        EXPECT_EQ(r.uncontrollable, d.uncontrollable);
    }
}

TEST(Mpc, ZeroAtTarget) {
    Rng rng(4);
    Network net = init_network(20, 4, InitMode::uniform_random, rng);
    ControlConfig cc;
    cc.c_star = 0;
    cc.horizon_p = 4;
    cc.kappa = unbounded;
    const auto r = mpc_control(std::vector<double>(20, cc.w_d), net, KernelParams{}, cc, RKTableau::rk4());
    for (double u : r.controls) EXPECT_NEAR(u, 0.0, 1e-12);
    EXPECT_TRUE(r.converged);
}

TEST(Mpc, NoImprovingCoordinatePerturbation) {
    for (const auto& tab : {RKTableau::explicit_euler(), RKTableau::heun(), RKTableau::rk4()}) {
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            Instance in = random_instance(seed);
            in.cc.horizon_p = 3;
            in.cc.kappa = (seed % 2 == 0) ? 0.1 : unbounded;
            const auto r = mpc_control(in.w, in.net, in.kp, in.cc, tab);
            ASSERT_EQ(r.controls.size(), 3u);
            const double j0 = horizon_cost(in.w, in.net, in.kp, in.cc, tab, r.controls);
            EXPECT_NEAR(j0, r.cost, 1e-15);
            for (std::size_t i = 0; i < 3; ++i)
                for (double delta : {-1e-3, 1e-3}) {
                    auto u = r.controls;
                    u[i] += delta;
                    if (std::abs(u[i]) > in.cc.kappa) continue;
                    EXPECT_GE(horizon_cost(in.w, in.net, in.kp, in.cc, tab, u), j0 - 1e-10)
                        << tab.name << " seed " << seed;
                }
            for (double u : r.controls) EXPECT_LE(std::abs(u), in.cc.kappa);
        }
    }
}

TEST(RkStep, ConsensusIsFixedPoint) {
    Rng rng(5);
    Network net = init_network(30, 6, InitMode::uniform_random, rng);
    const std::vector<double> w(30, -0.2);
    const auto q = selector_Q(net, 0);
    for (const auto& tab : {RKTableau::explicit_euler(), RKTableau::heun(), RKTableau::rk4()})
        EXPECT_EQ(step_opinions_rk(w, net, KernelParams{}, q, 0.0, tab, 0.05), w);
}

TEST(RkStep, EulerIsForwardStep) {
    Rng rng(6);
    Network net = init_network(30, 6, InitMode::uniform_random, rng);
    std::vector<double> w(30);
    for (double& x : w) x = rng.uniform(-1, 1);
    const auto q = selector_Q(net, 6);
    const KernelParams kp{};
    const auto f = opinion_rhs(w, net, kp);
    const auto next = step_opinions_rk(w, net, kp, q, 0.07, RKTableau::explicit_euler(), 0.01);
    for (std::size_t i = 0; i < 30; ++i) EXPECT_DOUBLE_EQ(next[i], w[i] + 0.01 * (f[i] + 0.07 * q[i]));
}

TEST(RkStep, Rk4CloseToEulerOnPath) {
    Network net(3);
    net.add_edge(0, 1);
    net.add_edge(1, 2);
    const KernelParams kp{0.0, 50.0, 0.4};
    const std::vector<double> w{0.0, 0.2, 0.6};
    const auto q = selector_Q(net, 0);
    const auto a = step_opinions_rk(w, net, kp, q, 0.0, RKTableau::explicit_euler(), 0.01);
    const auto b = step_opinions_rk(w, net, kp, q, 0.0, RKTableau::rk4(), 0.01);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_LT(std::abs(a[i] - b[i]), 1e-3);
        EXPECT_GT(std::abs(a[i] - b[i]), 0.0);
    }
}

TEST(Tableau, BuiltinsValidateAndUnknownRejected) {
    for (const char* name : {"euler", "heun", "rk4"}) EXPECT_NO_THROW(RKTableau::by_name(name).validate());
    EXPECT_THROW(RKTableau::by_name("dopri"), std::invalid_argument);
    RKTableau bad = RKTableau::heun();
    bad.b = {0.5, 0.6};
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(ControlConfigTest, Validation) {
    ControlConfig cc;
    EXPECT_NO_THROW(cc.validate());
    EXPECT_DOUBLE_EQ(cc.horizon_penalty(), cc.dt * cc.nu);
    cc.horizon_p = 0;
    EXPECT_THROW(cc.validate(), std::invalid_argument);
    cc = ControlConfig{};
    cc.kappa = -1;
    EXPECT_THROW(cc.validate(), std::invalid_argument);
}
