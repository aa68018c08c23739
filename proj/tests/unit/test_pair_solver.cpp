#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "natural/calculus.hpp"
#include "natural/config.hpp"
#include "natural/natural_pair.hpp"
#include "natural/scenario_tree.hpp"
#include "natural/solver.hpp"

namespace natural {
namespace {

using testing::Gen;

PairConfig default_pair() { return default_config().pair_config(); }

PairConfig zero_pair() {
    PairConfig c = default_pair();
    std::vector<Bump> bumps = c.spec.bumps();
    for (Bump& b : bumps) b.height = 0.0;
    c.spec = CoefficientSpec(bumps);
    return c;
}

// Exhaustive tree (trinomial plus the independent coin) with a Z that has atoms at levels 1 and 3.
struct TreeCase {
    ScenarioTree tree;
    SupermartingaleModel model;

    explicit TreeCase(int depth = 4)
        : tree(TimeGrid(0.8, depth), StepLaw::trinomial(0.25).with_independent_coin()), model(make(tree, depth)) {}
    static SupermartingaleModel make(const ScenarioTree& tree, int depth) {
        TreeZConfig c;
        c.delta_profile.assign(depth, 0.0);
        c.delta_profile[0] = 0.04;
        c.delta_profile[2] = 0.03;
        c.seed = 11;
        return generate_tree_z(tree, c);
    }
    // E[X_k | F_{k-1}] at leaf l for a family member, by summing over siblings.
    double step_mean(const NaturalPair& pair, const MartingaleFamily& fam, int l, int j, int k) const {
        double s = 0.0;
        for (int i = 0; i < tree.branching(); ++i) s += pair.probabilities()[i] * fam(tree.sibling(l, k, i), j, k);
        return s;
    }
};

TEST(NaturalPair, ZeroCoefficientKeepsFullScale) {
    const TreeCase s;
    const NaturalPair pair = build_y(zero_pair(), s.model, s.tree.bundle());
    for (int p = 0; p < pair.paths(); ++p)
        for (int k = 1; k <= pair.steps(); ++k) {
            EXPECT_EQ(pair.rho(p, k), 1.0);
            EXPECT_NEAR(pair.realized_margin(p, k).a, 1.0 + s.model.dm(p, k), 1e-15);
        }
}

TEST(NaturalPair, DirectionsHaveZeroMeanAndYIsAMartingale) {
    const TreeCase s;
    const NaturalPair pair = build_y(default_pair(), s.model, s.tree.bundle());
    for (int j = 0; j < pair.dimension(); ++j) {
        double mean = 0.0;
        for (int i = 0; i < s.tree.branching(); ++i) mean += pair.probabilities()[i] * pair.direction(i)[j];
        EXPECT_NEAR(mean, 0.0, 1e-15);
        const Process y = pair.component(j);
        for (int k = 1; k <= s.tree.depth(); ++k)
            for (int l = 0; l < s.tree.leaves(); l += s.tree.leaves_per_node(k - 1))
                EXPECT_NEAR(s.tree.step_expectation(y, l, k), y(l, k - 1), 1e-15);
    }
}

TEST(NaturalPair, ScalesComeFromTheLadderAndEveryBranchIsAdmissible) {
    const TreeCase s;
    const PairConfig cfg = default_pair();
    const NaturalPair pair = build_y(cfg, s.model, s.tree.bundle());
    for (int p = 0; p < pair.paths(); ++p)
        for (int k = 1; k <= pair.steps(); ++k) {
            const double r = pair.rho(p, k);
            bool on_ladder = r == 0.0;
            for (int l = 0; l <= cfg.ladder_depth; ++l) on_ladder = on_ladder || r == std::ldexp(1.0, -l);
            EXPECT_TRUE(on_ladder) << r;
            const Margins& w = pair.worst_margin(p, k);
            const Margins& m = pair.realized_margin(p, k);
            EXPECT_TRUE(w.admissible());
            EXPECT_LE(w.a, m.a);
            EXPECT_LE(w.b, m.b);
            // Direct rescan of the realized jump.
            std::vector<double> dy(pair.dimension());
            pair.jump(p, k, dy);
            const Margins direct = jump_set_margin(pair.spec(), pair.time(k), s.model.dm(p, k), dy, s.model.pred(p, k));
            EXPECT_NEAR(direct.a, m.a, 1e-13);
            EXPECT_NEAR(direct.b, m.b, 1e-13);
        }
}

TEST(NaturalPair, ConditionsHoldStrictlyOnTheTree) {
    const TreeCase s;
    const NaturalPair pair = build_y(default_pair(), s.model, s.tree.bundle());
    const MartingaleFamily fam = build_family(pair, s.model, UGrid::all(s.tree.depth()));
    const PairConditions all = check_family_conditions(pair, s.model, fam, true);
    EXPECT_TRUE(all.strict());
    EXPECT_GT(all.iii.evaluated, 0);
    const PairConditions adjacent = check_family_conditions(pair, s.model, fam, false);
    EXPECT_TRUE(adjacent.strict());
    EXPECT_LE(adjacent.iii.evaluated, all.iii.evaluated);
    EXPECT_GE(adjacent.iii.min_slack, all.iii.min_slack);
}

TEST(NaturalPair, OversizedFixedScaleIsCaught) {
    const TreeCase s;
    const NaturalPair pair = build_y_fixed(default_pair(), s.model, s.tree.bundle(), 40.0);
    bool inadmissible = false;
    for (int p = 0; p < pair.paths(); ++p)
        for (int k = 1; k <= pair.steps(); ++k) inadmissible = inadmissible || !pair.realized_margin(p, k).admissible();
    EXPECT_TRUE(inadmissible);
    Process x(pair.paths(), pair.steps(), 0.3), xp(pair.paths(), pair.steps(), 0.32);
    const PairConditions c = check_pair_conditions(pair, s.model, x, &xp, 0, pair.steps());
    EXPECT_FALSE(c.strict());
    EXPECT_GT(c.i.violations + c.ii.violations + c.iii.violations, 0);
}

TEST(Solver, ZeroStartStaysZero) {
    const TreeCase s;
    const NaturalPair pair = build_y(default_pair(), s.model, s.tree.bundle());
    const Process x = solve_natural(pair, s.model, 1, 0.0);
    for (int p = 0; p < x.paths(); ++p)
        for (int k = 1; k <= x.steps(); ++k) EXPECT_EQ(x(p, k), 0.0);
}

TEST(Solver, ZeroCoefficientIsAStochasticExponential) {
    const TreeCase s;
    const NaturalPair pair = build_y(zero_pair(), s.model, s.tree.bundle());
    const Process x = solve_natural(pair, s.model, 1, 0.4);
    const Process e = doleans_exponential(s.model.tilde_m, 1);
    for (int p = 0; p < x.paths(); ++p)
        for (int k = 1; k <= x.steps(); ++k) EXPECT_NEAR(x(p, k), 0.4 * e(p, k), 1e-15);
    std::vector<double> start(pair.paths(), 0.4);
    const Flow flow = flow_solve(pair, s.model, 1, start);
    for (int p = 0; p < x.paths(); ++p)
        for (int k = 1; k <= x.steps(); ++k) {
            EXPECT_NEAR(flow.xi(p, k), x(p, k), 1e-15);
            EXPECT_NEAR(flow.derivative(p, k), e(p, k), 1e-15);
        }
}

TEST(Solver, DeterministicZWithZeroCoefficientIsConstant) {
    const TimeGrid grid(1.0, 5);
    const PathBundle bundle = PathBundle::simulate(grid, StepLaw::trinomial(0.25), 3, 0, 50);
    const SupermartingaleModel model = deterministic_model({0.7, 0.65, 0.5, 0.5, 0.45, 0.3}, bundle);
    const NaturalPair pair = build_y(zero_pair(), model, bundle);
    const MartingaleFamily fam = build_family(pair, model, UGrid::all(5));
    for (int p = 0; p < fam.paths(); ++p)
        for (int j = 0; j < fam.size(); ++j)
            for (int k = j; k <= 5; ++k) EXPECT_NEAR(fam(p, j, k), 1.0 - model.z(p, j), 1e-15);
}

TEST(Solver, FamilyIsBoundedMonotoneAndMartingale) {
    const TreeCase s;
    const NaturalPair pair = build_y(default_pair(), s.model, s.tree.bundle());
    CheckReport report;
    const MartingaleFamily fam = build_family(pair, s.model, UGrid::all(s.tree.depth()), {}, &report);
    EXPECT_TRUE(report.passed());
    const int n = s.tree.depth();
    for (int l = 0; l < s.tree.leaves(); ++l)
        for (int j = 0; j <= n; ++j)
            for (int k = j; k <= n; ++k) {
                EXPECT_GE(fam(l, j, k), 0.0);
                EXPECT_LE(fam(l, j, k), 1.0 - s.model.z(l, k) + 1e-15);
                if (j > 0) {
                    EXPECT_LE(fam(l, j - 1, k), fam(l, j, k) + 1e-15);
                }
                if (k > j) {
                    EXPECT_NEAR(s.step_mean(pair, fam, l, j, k), fam(l, j, k - 1), 1e-15);
                }
            }
}

TEST(Solver, TreeIdentities) {
    const TreeCase s;
    const NaturalPair pair = build_y(default_pair(), s.model, s.tree.bundle());
    const MartingaleFamily fam = build_family(pair, s.model, UGrid::all(s.tree.depth()));
    EXPECT_LE(atom_identity_residual(fam, s.model, kappa(pair, s.model)), 1e-14);
    EXPECT_LE(gap_affine_residual(pair, s.model, fam), 1e-13);
    EXPECT_LE(regularization_residual(fam, s.model), 1e-15);
    for (int j = 1; j <= s.tree.depth(); ++j) EXPECT_LE(jump_identity_residual(pair, s.model, j, s.tree.depth()), 1e-14);
}

TEST(Solver, FlowDerivativeMatchesFiniteDifference) {
    const TreeCase s;
    const NaturalPair pair = build_y(default_pair(), s.model, s.tree.bundle());
    Gen gen(9);
    std::vector<double> x(pair.paths()), lo(pair.paths()), hi(pair.paths());
    const double h = 1e-5;
    for (int p = 0; p < pair.paths(); ++p) {
        x[p] = gen.uniform(0.05, 1.0 - s.model.z(p, 1) - 0.05);
        lo[p] = x[p] - h;
        hi[p] = x[p] + h;
    }
    const Flow f = flow_solve(pair, s.model, 1, x), fl = flow_solve(pair, s.model, 1, lo), fh = flow_solve(pair, s.model, 1, hi);
    for (int p = 0; p < pair.paths(); ++p)
        for (int k = 1; k <= pair.steps(); ++k)
            EXPECT_NEAR(f.derivative(p, k), (fh.xi(p, k) - fl.xi(p, k)) / (2 * h), 1e-7);
}

}  // namespace
}  // namespace natural
