#include <cmath>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "natural/calculus.hpp"
#include "natural/errors.hpp"
#include "natural/scenario_tree.hpp"
#include "natural/z_model.hpp"

namespace natural {
namespace {

ZConfig quiet(double z0, double lambda) {
    ZConfig c;
    c.z0 = z0;
    c.lambda = lambda;
    c.jump_size = 0.0;
    c.sigma_n = 0.0;
    c.jump_scale = 0.0;
    return c;
}

TEST(ZModel, NoNoiseReducesToExponentialDecay) {
    const TimeGrid grid(1.0, 10);
    const StepLaw law = StepLaw::trinomial(0.25);
    const PathBundle bundle = PathBundle::simulate(grid, law, 1, 0, 8);
    const SupermartingaleModel m = generate_z(quiet(0.8, 0.1), bundle);
    for (int p = 0; p < bundle.paths(); ++p)
        for (int k = 0; k <= 10; ++k) {
            EXPECT_NEAR(m.z(p, k), 0.8 * std::exp(-0.1 * grid.time(k)), 1e-15);
            EXPECT_NEAR(m.m(p, k), 0.8, 1e-15);
        }
    // One step of rate 0.1 over dt = 0.1 from Z = 0.8.
    EXPECT_NEAR(m.dA(0, 1), 0.8 * (1.0 - std::exp(-0.01)), 1e-16);
    EXPECT_NEAR(m.dA(0, 1), 7.96e-3, 5e-6);
}

TEST(ZModel, JumpOfLambdaMovesA) {
    const TimeGrid grid(1.0, 10);
    ZConfig c = quiet(0.6, 0.0);
    c.jump_size = 0.3;
    c.jump_time = 0.5;
    const PathBundle bundle = PathBundle::simulate(grid, StepLaw::trinomial(0.25), 2, 0, 4);
    const SupermartingaleModel m = generate_z(c, bundle);
    for (int k = 1; k <= 10; ++k) EXPECT_NEAR(m.dA(0, k), k == 5 ? 0.6 * (1.0 - std::exp(-0.3)) : 0.0, 1e-15);
    const auto lam = lambda_path(c, grid);
    EXPECT_EQ(lam[4], 0.0);
    EXPECT_NEAR(lam[5], 0.3, 1e-15);
}

TEST(ZModel, MatchesOneStepRecursion) {
    const TimeGrid grid(2.0, 20);
    const StepLaw law = StepLaw::trinomial(0.25).with_independent_coin();
    const PathBundle bundle = PathBundle::simulate(grid, law, 3, 0, 200);
    const ZConfig c;
    const SupermartingaleModel m = generate_z(c, bundle);
    const auto lam = lambda_path(c, grid);
    const int d = law.driver_index(DriverKind::diffusion), j = law.driver_index(DriverKind::jump);
    for (int p = 0; p < bundle.paths(); ++p) {
        double z = c.z0;
        for (int k = 1; k <= 20; ++k) {
            const double chi = c.sigma_n * std::sqrt(grid.dt()) * bundle.driver(p, k, d) + c.jump_scale * bundle.driver(p, k, j);
            z = z * std::exp(-(lam[k] - lam[k - 1])) * (1.0 + (1.0 - z) * chi);
            EXPECT_NEAR(m.z(p, k), z, 1e-14);
        }
    }
    EXPECT_TRUE(check_z_model(m, 1e-12).passed());
}

TEST(ZModel, PredictableProjectionIdentity) {
    const TimeGrid grid(2.0, 20);
    const PathBundle bundle = PathBundle::simulate(grid, StepLaw::trinomial(0.25), 4, 0, 100);
    const SupermartingaleModel m = generate_z(ZConfig{}, bundle);
    for (int p = 0; p < bundle.paths(); ++p)
        for (int k = 1; k <= 20; ++k) {
            EXPECT_NEAR(m.pred(p, k), 1.0 - m.z(p, k - 1) + m.dA(p, k), 1e-15);
            EXPECT_NEAR(m.pred(p, k) * (1.0 + m.dm(p, k)), 1.0 - m.z(p, k), 1e-14);
            EXPECT_GT(m.dm(p, k), -1.0);
        }
}

TEST(ZModel, OneMinusZSolvesTheLinearEquation) {
    // 1 - Z = 1 - Z_0 + int (1 - Z_-) dtilde_m + A, checked against the affine solver.
    const TimeGrid grid(2.0, 20);
    const PathBundle bundle = PathBundle::simulate(grid, StepLaw::trinomial(0.25), 5, 0, 50);
    const SupermartingaleModel m = generate_z(ZConfig{}, bundle);
    const Process y = affine_solve(0, 1.0 - m.z(0, 0), m.tilde_m, m.a);
    for (int p = 0; p < bundle.paths(); ++p)
        for (int k = 0; k <= 20; ++k) EXPECT_NEAR(y(p, k), 1.0 - m.z(p, k), 1e-13);
}

TEST(ZModel, TreeDriverIsAMartingale) {
    const ScenarioTree tree(TimeGrid(1.2, 5), StepLaw::trinomial(0.25));
    ZConfig c;
    c.jump_time = 0.48;
    const SupermartingaleModel m = generate_z(c, tree.bundle());
    for (int k = 1; k <= 5; ++k)
        for (int l = 0; l < tree.leaves(); l += tree.leaves_per_node(k - 1)) {
            EXPECT_NEAR(tree.step_expectation(m.tilde_m, l, k), m.tilde_m(l, k - 1), 1e-15);
            EXPECT_NEAR(tree.step_expectation(m.m, l, k), m.m(l, k - 1), 1e-15);
        }
}

TEST(ZModel, MonteCarloMeanOfMStaysAtZ0) {
    const TimeGrid grid(2.0, 20);
    const PathBundle bundle = PathBundle::simulate(grid, StepLaw::trinomial(0.25).with_independent_coin(), 6, 0, 20000);
    const SupermartingaleModel m = generate_z(ZConfig{}, bundle);
    double s = 0.0, s2 = 0.0;
    const int n = bundle.paths();
    for (int p = 0; p < n; ++p) {
        s += m.m(p, 20);
        s2 += m.m(p, 20) * m.m(p, 20);
    }
    const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
    EXPECT_LE(std::abs(mean - 0.5), 3.0 * se);
}

TEST(ZModel, ValidationNamesTheField) {
    const TimeGrid grid(2.0, 20);
    const StepLaw law = StepLaw::trinomial(0.25);
    auto message = [&](ZConfig c) {
        try {
            validate(c, grid, law);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    ZConfig c;
    c.epsilon = 0.5;
    EXPECT_NE(message(c).find("z.epsilon"), std::string::npos);
    c = ZConfig{};
    c.z0 = 1.0;
    EXPECT_NE(message(c).find("z.Z0"), std::string::npos);
    c = ZConfig{};
    c.jump_time = 0.55;
    EXPECT_NE(message(c).find("z.t_star"), std::string::npos);
    c = ZConfig{};
    c.sigma_n = 5.0;
    EXPECT_NE(message(c).find("z.sigma_N"), std::string::npos);
    c = ZConfig{};
    c.epsilon = 0.2;
    EXPECT_NE(message(c).find("z.epsilon"), std::string::npos);
    EXPECT_EQ(message(ZConfig{}), "");
}

TEST(ZModel, WorstCaseBoundsEverySimulatedPath) {
    const TimeGrid grid(2.0, 20);
    const StepLaw law = StepLaw::trinomial(0.25).with_independent_coin();
    const ZRange r = z_worst_case(ZConfig{}, grid, law);
    const SupermartingaleModel m = generate_z(ZConfig{}, PathBundle::simulate(grid, law, 7, 0, 5000));
    for (int p = 0; p < m.paths(); ++p)
        for (int k = 0; k <= 20; ++k) {
            EXPECT_GE(m.z(p, k), r.lowest);
            EXPECT_LE(m.z(p, k), r.highest);
        }
}

TEST(ZModel, DeterministicModelDecomposition) {
    const TimeGrid grid(1.0, 3);
    const PathBundle bundle = PathBundle::simulate(grid, StepLaw::trinomial(0.25), 8, 0, 3);
    const SupermartingaleModel m = deterministic_model({0.7, 0.6, 0.6, 0.2}, bundle);
    EXPECT_TRUE(check_z_model(m, 1e-12).passed());
    EXPECT_NEAR(m.a(1, 3), 0.5, 1e-15);
    EXPECT_EQ(m.dm(1, 2), 0.0);
}

}  // namespace
}  // namespace natural
