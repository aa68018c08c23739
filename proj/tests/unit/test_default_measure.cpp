#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "natural/config.hpp"
#include "natural/default_measure.hpp"
#include "natural/errors.hpp"
#include "natural/solver.hpp"

namespace natural {
namespace {

using testing::Gen;

PairConfig zero_pair() {
    PairConfig c = default_config().pair_config();
    std::vector<Bump> bumps = c.spec.bumps();
    for (Bump& b : bumps) b.height = 0.0;
    c.spec = CoefficientSpec(bumps);
    return c;
}

struct TreeCase {
    ScenarioTree tree{TimeGrid(0.8, 4), StepLaw::trinomial(0.25).with_independent_coin()};
    SupermartingaleModel model;
    NaturalPair pair;
    MartingaleFamily family;

    TreeCase() : model(make(tree)), pair(build_y(default_config().pair_config(), model, tree.bundle())) {
        family = build_family(pair, model, UGrid::all(4));
    }
    static SupermartingaleModel make(const ScenarioTree& tree) {
        TreeZConfig c;
        c.delta_profile = {0.04, 0.0, 0.03, 0.0};
        c.seed = 12;
        return generate_tree_z(tree, c);
    }
};

TEST(SampleTau, DeterministicZGivesTheCdfOfOneMinusZ) {
    const TimeGrid grid(1.0, 5);
    const std::vector<double> z{0.9, 0.8, 0.6, 0.6, 0.5, 0.3};
    const PathBundle bundle = PathBundle::simulate(grid, StepLaw::trinomial(0.25), 1, 0, 40000);
    const SupermartingaleModel model = deterministic_model(z, bundle);
    const MartingaleFamily fam = build_family(build_y(zero_pair(), model, bundle), model, UGrid::all(5));
    const auto samples = sample_tau(fam, bundle, 77);
    std::vector<double> count(7, 0.0);
    for (const auto& s : samples) {
        ++count[s.beyond_horizon() ? 6 : s.tau];
        if (!s.beyond_horizon()) {
            EXPECT_EQ(s.tau, fam.ugrid().index(s.cell));
        }
    }
    const double n = bundle.paths();
    double cdf = 0.0;
    for (int k = 0; k <= 5; ++k) {
        cdf += count[k] / n;
        const double expected = 1.0 - z[k];
        EXPECT_LE(std::abs(cdf - expected), 3.0 * std::sqrt(expected * (1 - expected) / n) + 1e-12) << k;
    }
    // Z flat between 2 and 3: no default can be placed at 3.
    EXPECT_EQ(count[3], 0.0);
}

TEST(SampleTau, SameSeedSameDraws) {
    const TimeGrid grid(1.0, 5);
    const PathBundle bundle = PathBundle::simulate(grid, StepLaw::trinomial(0.25), 1, 0, 100);
    const SupermartingaleModel model = deterministic_model({0.9, 0.8, 0.6, 0.6, 0.5, 0.3}, bundle);
    const MartingaleFamily fam = build_family(build_y(zero_pair(), model, bundle), model, UGrid::all(5));
    const auto a = sample_tau(fam, bundle, 5), b = sample_tau(fam, bundle, 5);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].uniform, b[i].uniform);
        EXPECT_EQ(a[i].cell, b[i].cell);
    }
}

TEST(SampleTau, DecreasingTerminalCdfIsRejected) {
    const TimeGrid grid(1.0, 2);
    const PathBundle bundle = PathBundle::simulate(grid, StepLaw::trinomial(0.25), 1, 0, 1);
    MartingaleFamily fam(UGrid::all(2), 1);
    for (int j = 0; j <= 2; ++j)
        for (int k = 0; k <= 2; ++k) fam(0, j, k) = 0.5 - 0.1 * j;
    EXPECT_THROW(sample_tau(fam, bundle, 1), InvalidFamily);
}

TEST(PKernel, SecantAndDerivativeForms) {
    const TreeCase c;
    MartingaleFamily fam(UGrid::all(4), c.tree.leaves());
    // Members 0 and 1 coincide (derivative form), members 1 and 2 differ (secant form).
    for (int p = 0; p < c.tree.leaves(); ++p)
        for (int k = 0; k <= 4; ++k) {
            fam(p, 0, k) = 0.2;
            fam(p, 1, k) = 0.2;
            fam(p, 2, k) = 0.35;
            fam(p, 3, k) = 0.4;
            fam(p, 4, k) = 0.45;
        }
    const int p = 7, k = 4;
    const double t = c.pair.time(k), pred = c.model.pred(p, k);
    std::vector<double> out(2), fa(2), fb(2), df(2);
    p_kernel(c.pair, c.model, fam, p, k, 1, 1e-12, out);
    evaluate_df(c.pair.spec(), t, 0.2, pred, df);
    EXPECT_NEAR(out[0], df[0], 1e-15);
    EXPECT_NEAR(out[1], df[1], 1e-15);
    p_kernel(c.pair, c.model, fam, p, k, 2, 1e-12, out);
    evaluate_f(c.pair.spec(), t, 0.2, pred, fa);
    evaluate_f(c.pair.spec(), t, 0.35, pred, fb);
    EXPECT_NEAR(out[0], (fb[0] - fa[0]) / 0.15, 1e-14);
    EXPECT_NEAR(out[1], (fb[1] - fa[1]) / 0.15, 1e-14);
    // j = 0 compares against a = 0, where f vanishes.
    p_kernel(c.pair, c.model, fam, p, k, 0, 1e-12, out);
    evaluate_f(c.pair.spec(), t, 0.2, pred, fb);
    EXPECT_NEAR(out[0], fb[0] / 0.2, 1e-14);
}

TEST(PKernel, EqualValuesAtTheEndsGiveZero) {
    // A coefficient with f(a) = f(b): both ends off the bump support.
    PairConfig cfg = default_config().pair_config();
    cfg.spec = CoefficientSpec({Bump{0.5, 0.0, 0.1, 1.0}, Bump{0.5, 0.0, 0.1, 1.0}});
    const TreeCase c;
    const NaturalPair pair = build_y(cfg, c.model, c.tree.bundle());
    MartingaleFamily fam(UGrid::all(4), c.tree.leaves());
    for (int p = 0; p < c.tree.leaves(); ++p)
        for (int k = 0; k <= 4; ++k)
            for (int j = 0; j <= 4; ++j) fam(p, j, k) = j < 2 ? 0.1 : 0.9;
    std::vector<double> out(2);
    p_kernel(pair, c.model, fam, 3, 3, 2, 1e-12, out);
    EXPECT_EQ(out[0], 0.0);
    EXPECT_EQ(out[1], 0.0);
}

TEST(Enlargement, IndependentMartingaleHasNoCompensator) {
    // Driver-linear Z on the exhaustive tree: neither M nor Y loads on the coin.
    const ScenarioTree tree(TimeGrid(0.8, 4), StepLaw::trinomial(0.25).with_independent_coin());
    ZConfig zc;
    zc.jump_time = 0.4;
    const SupermartingaleModel model = generate_z(zc, tree.bundle());
    const NaturalPair pair = build_y(default_config().pair_config(), model, tree.bundle());
    const MartingaleFamily fam = build_family(pair, model, UGrid::all(4));
    int seen = 0;
    for (const auto& x : test_martingales(tree.bundle(), model)) {
        if (x.name != "independent") continue;
        ++seen;
        for (int p = 0; p < tree.leaves(); p += 5)
            for (int k = 1; k <= 4; ++k)
                for (int cell = 0; cell <= fam.size(); ++cell)
                    EXPECT_EQ(compensator_increment(pair, model, fam, x.x, p, k, cell, 1e-12), 0.0);
    }
    EXPECT_EQ(seen, 1);
}

TEST(Enlargement, CompensatedIncrementsHaveZeroMeanOnTheTree) {
    const TreeCase c;
    const ProductMeasure q = build_product_measure(c.tree, c.family, c.model, 1e-12);
    const auto xs = test_martingales(c.tree.bundle(), c.model);
    EXPECT_EQ(xs.size(), 4u);
    for (const auto& x : xs) {
        const TreeEnlargement r = tree_enlargement_check(c.tree, c.pair, c.model, c.family, q, x.x, 1e-12);
        EXPECT_LE(r.max_conditional_mean, 1e-10) << x.name;
        EXPECT_GT(r.cells, 0);
    }
}

TEST(Enlargement, StateMartingaleHasANonzeroCompensator) {
    // Negative control for the zero-mean check above: the state-dependent martingale correlates with
    // M and Y, so its compensator cannot vanish identically.
    const TreeCase c;
    const ProductMeasure q = build_product_measure(c.tree, c.family, c.model, 1e-12);
    double worst = 0.0;
    for (const auto& x : test_martingales(c.tree.bundle(), c.model)) {
        if (x.name != "state") continue;
        for (int p = 0; p < c.tree.leaves(); ++p)
            for (int k = 1; k <= 4; ++k)
                for (int cell = 0; cell <= c.family.size(); ++cell)
                    worst = std::max(worst, std::abs(compensator_increment(c.pair, c.model, c.family, x.x, p, k, cell, 1e-12)));
    }
    EXPECT_GT(worst, 1e-6);
}

TEST(EnlargementAccumulator, MergeMatchesSinglePass) {
    Gen gen(3);
    const std::size_t n = functional_names().size();
    EnlargementAccumulator all("x"), a("x"), b("x");
    for (int i = 0; i < 500; ++i) {
        std::vector<double> s(n);
        for (double& v : s) v = gen.uniform(-1, 1);
        all.add_path(s);
        (i % 3 ? a : b).add_path(s);
    }
    a.merge(b);
    EXPECT_EQ(a.paths(), 500);
    for (std::size_t i = 0; i < n; ++i) {
        EXPECT_NEAR(a.mean(int(i)), all.mean(int(i)), 1e-15);
        EXPECT_NEAR(a.standard_error(int(i)), all.standard_error(int(i)), 1e-14);
    }
    EnlargementAccumulator zero("z");
    zero.add_path(std::vector<double>(n, 0.0));
    zero.add_path(std::vector<double>(n, 0.0));
    EXPECT_EQ(zero.z_score(0), 0.0);
}

TEST(AbsoluteContinuity, DeterministicZeroCoefficientHasUnitRatio) {
    const TimeGrid grid(1.0, 6);
    const PathBundle bundle = PathBundle::simulate(grid, StepLaw::trinomial(0.25), 2, 0, 20);
    const SupermartingaleModel model = deterministic_model({0.9, 0.85, 0.85, 0.7, 0.6, 0.6, 0.4}, bundle);
    const MartingaleFamily fam = build_family(build_y(zero_pair(), model, bundle), model, UGrid::all(6));
    const AbsoluteContinuity r = absolute_continuity_check(fam, model, 6);
    EXPECT_NEAR(r.max_ratio, 1.0, 1e-14);
    EXPECT_NEAR(r.min_ratio, 1.0, 1e-14);
    EXPECT_EQ(r.zero_mass, 0.0);
    EXPECT_EQ(r.flat_cells, 2 * 20);
}

TEST(AbsoluteContinuity, TreeFamilyPutsNoMassWhereAIsFlat) {
    const TreeCase c;
    const AbsoluteContinuity r = absolute_continuity_check(c.family, c.model, 4);
    EXPECT_LE(r.zero_mass, 1e-14);
    EXPECT_GT(r.flat_cells, 0);
    EXPECT_GE(r.min_ratio, 0.0);
}

TEST(Polarization, SmallRunConservesMassAndPolarizes) {
    PolarizationOptions o;
    o.horizons = {2.0, 8.0};
    o.paths = 400;
    o.u_count = 10;
    o.seed = 3;
    const auto rows = polarization_experiment(o);
    ASSERT_EQ(rows.size(), 2u);
    for (const auto& r : rows) {
        EXPECT_LE(r.mass_residual, 1e-12);
        EXPECT_EQ(r.initial_member_max, 0.0);
        EXPECT_NEAR(std::accumulate(r.histogram.begin(), r.histogram.end(), 0.0), 1.0, 1e-12);
        EXPECT_EQ(r.steps, static_cast<int>(std::lround(r.horizon / o.dt)));
    }
    EXPECT_LT(rows[1].interior_fraction, rows[0].interior_fraction);
}

}  // namespace
}  // namespace natural
