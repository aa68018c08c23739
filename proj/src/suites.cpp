#include "natural/suites.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "natural/calculus.hpp"
#include "natural/default_measure.hpp"
#include "natural/errors.hpp"
#include "natural/io.hpp"
#include "natural/natural_pair.hpp"
#include "natural/path_bundle.hpp"
#include "natural/scenario_tree.hpp"
#include "natural/solver.hpp"
#include "natural/z_model.hpp"

namespace natural {

namespace {

using nlohmann::ordered_json;

std::string fmt(double x) { return format_double(x); }

void add_conditions(CheckReport& report, const std::string& prefix, const PairConditions& c) {
    auto add = [&](const std::string& name, const ConditionTally& t) {
        report.add_flag(prefix + name, t.strict(),
                        "evaluated " + std::to_string(t.evaluated) + ", violations " + std::to_string(t.violations) +
                            ", weak " + std::to_string(t.weak) + ", min slack " + fmt(t.min_slack));
    };
    add("condition_i", c.i);
    add("condition_ii", c.ii);
    add("condition_iii", c.iii);
    report.add_flag(prefix + "condition_forms_agree", c.form_disagreements == 0,
                    "disagreements " + std::to_string(c.form_disagreements));
}

ordered_json tally_json(const ConditionTally& t) {
    return {{"evaluated", t.evaluated}, {"violations", t.violations}, {"weak", t.weak}, {"min_slack", t.min_slack}};
}

// Ladder statistics of a built pair: realized margins, worst-case margins and the distribution of rho.
struct LadderStats {
    std::int64_t steps = 0;
    std::int64_t inadmissible = 0;
    double min_realized_a = INFINITY;
    double min_realized_b = INFINITY;
    double min_worst_a = INFINITY;
    double min_worst_b = INFINITY;
    std::map<double, std::int64_t> rho;

    void add(const NaturalPair& pair) {
        for (int p = 0; p < pair.paths(); ++p)
            for (int k = 1; k <= pair.steps(); ++k) {
                ++steps;
                const Margins& r = pair.realized_margin(p, k);
                const Margins& w = pair.worst_margin(p, k);
                if (!r.admissible()) ++inadmissible;
                min_realized_a = std::min(min_realized_a, r.a);
                min_realized_b = std::min(min_realized_b, r.b);
                min_worst_a = std::min(min_worst_a, w.a);
                min_worst_b = std::min(min_worst_b, w.b);
                ++rho[pair.rho(p, k)];
            }
    }

    void report(CheckReport& out) const {
        out.add_flag("pair.realized_jumps_admissible", inadmissible == 0,
                     "inadmissible " + std::to_string(inadmissible) + " of " + std::to_string(steps) +
                         ", min margins " + fmt(min_realized_a) + " " + fmt(min_realized_b));
    }

    ordered_json to_json() const {
        ordered_json hist = ordered_json::array();
        double mean = 0.0;
        for (auto it = rho.rbegin(); it != rho.rend(); ++it) {
            hist.push_back({{"rho", it->first}, {"count", it->second}});
            mean += it->first * double(it->second);
        }
        return {{"steps", steps},
                {"mean_rho", steps ? mean / double(steps) : 0.0},
                {"rho_counts", hist},
                {"min_realized_margin_a", min_realized_a},
                {"min_realized_margin_b", min_realized_b},
                {"min_worst_margin_a", min_worst_a},
                {"min_worst_margin_b", min_worst_b}};
    }
};

// Running sums for mean-zero per-path statistics.
struct MeanZero {
    std::int64_t n = 0;
    double sum = 0.0;
    double sum2 = 0.0;

    void add(double x) {
        ++n;
        sum += x;
        sum2 += x * x;
    }
    double mean() const { return n ? sum / double(n) : 0.0; }
    double standard_error() const {
        if (n < 2) return 0.0;
        const double mu = mean();
        return std::sqrt(std::max(0.0, (sum2 - double(n) * mu * mu) / double(n - 1)) / double(n));
    }
    double z() const {
        const double se = standard_error();
        if (se == 0.0) return mean() == 0.0 ? 0.0 : INFINITY;
        return mean() / se;
    }
};

// Default-time sampling statistics: survival against E[Z_N] and the CDF against E[M^u_N] per u-cell.
struct TauStats {
    MeanZero survival;
    std::vector<MeanZero> cdf;
    std::vector<double> empirical;  // running counts of tau <= u_j
    std::vector<double> expected;   // running sums of M^{u_j}_N

    void add(const MartingaleFamily& family, const SupermartingaleModel& model,
             const std::vector<DefaultSample>& samples) {
        const int cells = family.size();
        if (cdf.empty()) {
            cdf.resize(cells);
            empirical.assign(cells, 0.0);
            expected.assign(cells, 0.0);
        }
        const int n = model.steps();
        for (int p = 0; p < family.paths(); ++p) {
            const DefaultSample& s = samples[p];
            survival.add((s.beyond_horizon() ? 1.0 : 0.0) - model.z(p, n));
            for (int j = 0; j < cells; ++j) {
                const double hit = (!s.beyond_horizon() && s.cell <= j) ? 1.0 : 0.0;
                cdf[j].add(hit - family.terminal(p, j));
                empirical[j] += hit;
                expected[j] += family.terminal(p, j);
            }
        }
    }

    void report(CheckReport& out, double sigma) const {
        out.add_bound("tau.survival_matches_Z", std::abs(survival.z()), sigma,
                      "mean " + fmt(survival.mean()) + ", se " + fmt(survival.standard_error()));
        double worst = 0.0, sup = 0.0;
        for (std::size_t j = 0; j < cdf.size(); ++j) {
            worst = std::max(worst, std::abs(cdf[j].z()));
            sup = std::max(sup, std::abs(cdf[j].mean()));
        }
        out.add_bound("tau.cdf_matches_family", worst, sigma, "sup |F_emp - E[M^u_N]| " + fmt(sup));
    }

    std::string csv(const UGrid& ug, const TimeGrid& grid) const {
        std::ostringstream os;
        CsvWriter w(os);
        w.header({"u_index", "u", "empirical_cdf", "expected_cdf", "z"});
        for (std::size_t j = 0; j < cdf.size(); ++j) {
            const double n = double(cdf[j].n);
            w.field(ug.index(int(j))).field(grid.time(ug.index(int(j))));
            w.field(empirical[j] / n).field(expected[j] / n).field(cdf[j].z());
            w.end_row();
        }
        return os.str();
    }
};

std::string tau_csv_rows(const std::vector<DefaultSample>& samples, const TimeGrid& grid, bool header) {
    std::ostringstream os;
    CsvWriter w(os);
    if (header) w.header({"path", "cell", "tau_index", "tau", "uniform"});
    for (const auto& s : samples) {
        w.field(static_cast<long long>(s.path_id)).field(s.cell).field(s.tau);
        if (s.beyond_horizon()) w.field(std::string_view("inf")); else w.field(grid.time(s.tau));
        w.field(s.uniform);
        w.end_row();
    }
    return os.str();
}

int count_decreasing(const std::vector<double>& v) {
    int n = 0;
    for (std::size_t i = 1; i < v.size(); ++i) n += std::abs(v[i]) < std::abs(v[i - 1]) ? 1 : 0;
    return n;
}

PathBundle simulate_batch(const RunConfig& c, std::uint64_t seed, int first, int count) {
    return PathBundle::simulate(c.time_grid(), c.step_law(), seed, static_cast<std::uint64_t>(first), count);
}

}  // namespace

void merge_max(CheckReport& into, const CheckReport& batch) {
    for (const Check& c : batch.checks()) {
        Check* existing = nullptr;
        for (Check& e : into.checks())
            if (e.name == c.name) existing = &e;
        if (!existing) {
            into.checks().push_back(c);
            continue;
        }
        existing->passed = existing->passed && c.passed;
        if (std::isnan(c.residual) || c.residual > existing->residual) {
            existing->residual = c.residual;
            existing->detail = c.detail;
        }
    }
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"verify-tree", "verify-mc", "build-family",
                                                "sample-tau",  "regularity", "polarize"};
    return names;
}

SuiteResult run_verify_tree(const RunConfig& c) {
    SuiteResult r;
    r.suite = "verify-tree";
    r.seed = c.tree.seed;
    const double tol = c.tolerances.exact;
    const ScenarioTree tree(TimeGrid(c.tree.horizon, c.tree.depth), c.tree_law());
    TreeZConfig tz;
    tz.leaf_low = c.tree.leaf_low;
    tz.leaf_high = c.tree.leaf_high;
    tz.delta_profile = c.tree.delta_profile;
    if (tz.delta_profile.empty()) tz.delta_profile.assign(c.tree.depth, 0.0);
    tz.epsilon = c.tree.epsilon;
    tz.seed = c.tree.seed;
    const SupermartingaleModel model = generate_tree_z(tree, tz);
    r.report.append(check_z_model(model, tol));

    const NaturalPair pair = build_y(c.pair_config(), model, tree.bundle());
    LadderStats ladder;
    ladder.add(pair);
    ladder.report(r.report);

    CheckReport family_report;
    const MartingaleFamily family =
        build_family(pair, model, UGrid::all(tree.depth()), {tol, false}, &family_report);
    r.report.append(family_report);
    r.report.append(verify_im_axioms(tree, family, model, tol));

    const ProductMeasure measure = build_product_measure(tree, family, model, tol);
    std::vector<double> h(tree.leaves());
    for (int l = 0; l < tree.leaves(); ++l) h[l] = std::sin(1.0 + l);
    r.report.append(verify_product_measure(tree, family, model, measure, h, tol));

    const PairConditions cond = check_family_conditions(pair, model, family, true);
    add_conditions(r.report, "pair.", cond);

    const Process kap = kappa(pair, model);
    r.report.add_bound("atom_identity", atom_identity_residual(family, model, kap), tol);
    r.report.add_bound("gap_affine_equation", gap_affine_residual(pair, model, family), tol);
    r.report.add_bound("regularization_cross_check", regularization_residual(family, model), tol);
    const AbsoluteContinuity ac = absolute_continuity_check(family, model, tree.depth());
    r.report.add_bound("zero_mass_where_A_flat", ac.zero_mass, tol,
                       "flat cells " + std::to_string(ac.flat_cells));
    if (pair.spec().autonomous()) {
        double worst = 0.0;
        for (int j = 1; j <= tree.depth(); ++j)
            worst = std::max(worst, jump_identity_residual(pair, model, j, tree.depth()));
        r.report.add_bound("jump_identity", worst, c.regularity.jump_tolerance);
    }

    ordered_json enlargement = ordered_json::array();
    for (const auto& x : test_martingales(tree.bundle(), model)) {
        const TreeEnlargement te =
            tree_enlargement_check(tree, pair, model, family, measure, x.x, c.tolerances.atom_tol);
        r.report.add_bound("enlargement." + x.name, te.max_conditional_mean, c.tolerances.enlargement,
                           "cells " + std::to_string(te.cells) + ", negligible " + std::to_string(te.skipped));
        enlargement.push_back({{"martingale", x.name},
                               {"max_conditional_mean", te.max_conditional_mean},
                               {"cells", te.cells},
                               {"negligible_cells", te.skipped}});
    }

    r.details["tree"] = {{"b", tree.branching()}, {"depth", tree.depth()}, {"leaves", tree.leaves()}};
    r.details["ladder"] = ladder.to_json();
    r.details["conditions"] = {{"i", tally_json(cond.i)}, {"ii", tally_json(cond.ii)}, {"iii", tally_json(cond.iii)}};
    r.details["enlargement"] = enlargement;
    r.details["absolute_continuity"] = {{"flat_cells", ac.flat_cells}, {"max_ratio", ac.max_ratio}, {"min_ratio", ac.min_ratio}};
    return r;
}

SuiteResult run_verify_mc(const RunConfig& c) {
    SuiteResult r;
    r.suite = "verify-mc";
    r.seed = c.mc.seed;
    const double tol = c.tolerances.exact;
    const PairConfig pc = c.pair_config();
    const UGrid ug = UGrid::all(c.grid.steps);

    CheckReport pathwise;
    LadderStats ladder;
    PairConditions cond;
    TauStats tau;
    double atom = 0.0, gap = 0.0;
    std::vector<EnlargementAccumulator> acc;

    for (int first = 0; first < c.mc.paths; first += c.mc.batch) {
        const int count = std::min(c.mc.batch, c.mc.paths - first);
        const PathBundle bundle = simulate_batch(c, c.mc.seed, first, count);
        const SupermartingaleModel model = generate_z(c.z, bundle);
        merge_max(pathwise, check_z_model(model, tol));
        const NaturalPair pair = build_y(pc, model, bundle);
        ladder.add(pair);

        CheckReport family_report;
        const MartingaleFamily family = build_family(pair, model, ug, {tol, false}, &family_report);
        merge_max(pathwise, family_report);
        cond.merge(check_family_conditions(pair, model, family, false));
        atom = std::max(atom, atom_identity_residual(family, model, kappa(pair, model)));
        gap = std::max(gap, gap_affine_residual(pair, model, family));

        const auto samples = sample_tau(family, bundle, c.mc.seed, tol);
        tau.add(family, model, samples);
        const auto xs = test_martingales(bundle, model);
        if (acc.empty())
            for (const auto& x : xs) acc.emplace_back(x.name);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            EnlargementAccumulator batch(xs[i].name);
            accumulate_enlargement(bundle, model, pair, family, samples, xs[i], c.tolerances.atom_tol, batch);
            acc[i].merge(batch);
        }
    }

    for (const Check& ch : pathwise.checks()) r.report.checks().push_back(ch);
    ladder.report(r.report);
    add_conditions(r.report, "pair.", cond);
    r.report.add_bound("atom_identity", atom, tol);
    r.report.add_bound("gap_affine_equation", gap, tol);
    tau.report(r.report, c.tolerances.sigma);

    const auto& names = functional_names();
    std::ostringstream os;
    CsvWriter w(os);
    w.header({"martingale", "functional", "paths", "mean", "standard_error", "z"});
    ordered_json enlargement = ordered_json::array();
    for (const auto& a : acc) {
        double worst = 0.0;
        for (std::size_t i = 0; i < names.size(); ++i) {
            const double z = a.z_score(int(i));
            worst = std::max(worst, std::abs(z));
            r.report.add_bound("enlargement." + a.martingale() + "." + names[i], std::abs(z), c.tolerances.sigma,
                               "mean " + fmt(a.mean(int(i))) + ", se " + fmt(a.standard_error(int(i))));
            w.field(a.martingale()).field(names[i]).field(static_cast<long long>(a.paths()));
            w.field(a.mean(int(i))).field(a.standard_error(int(i))).field(z);
            w.end_row();
        }
        if (a.martingale() == "independent")
            r.report.add_bound("enlargement.independent.compensator_vanishes", a.max_abs_compensator, 0.0);
        enlargement.push_back({{"martingale", a.martingale()},
                               {"functionals", names.size()},
                               {"max_abs_z", worst},
                               {"max_abs_compensator", a.max_abs_compensator}});
    }
    r.files.emplace_back("enlargement.csv", os.str());
    r.files.emplace_back("tau_cdf.csv", tau.csv(ug, c.time_grid()));

    r.details["paths"] = c.mc.paths;
    r.details["batch"] = c.mc.batch;
    r.details["ladder"] = ladder.to_json();
    r.details["conditions"] = {{"i", tally_json(cond.i)}, {"ii", tally_json(cond.ii)}, {"iii", tally_json(cond.iii)},
                               {"pairs", "consecutive u-grid members"}};
    r.details["enlargement"] = enlargement;
    return r;
}

SuiteResult run_build_family(const RunConfig& c) {
    SuiteResult r;
    r.suite = "build-family";
    r.seed = c.mc.seed;
    const int paths = std::min(c.mc.paths, c.outputs.family_paths);
    if (paths < 1) throw ConfigError("outputs.family_paths: build-family needs at least one path");
    const PathBundle bundle = simulate_batch(c, c.mc.seed, 0, paths);
    const SupermartingaleModel model = generate_z(c.z, bundle);
    const NaturalPair pair = build_y(c.pair_config(), model, bundle);
    const UGrid ug = UGrid::strided(c.grid.steps, c.mc.u_stride);
    CheckReport family_report;
    const MartingaleFamily family = build_family(pair, model, ug, {c.tolerances.exact, false}, &family_report);
    r.report.append(family_report);
    add_conditions(r.report, "pair.", check_family_conditions(pair, model, family, true));

    std::ostringstream os;
    CsvWriter w(os);
    w.header({"path", "u_index", "u", "t_index", "t", "M", "one_minus_Z"});
    const TimeGrid grid = c.time_grid();
    for (int p = 0; p < paths; ++p)
        for (int j = 0; j < family.size(); ++j)
            for (int k = ug.index(j); k <= grid.steps(); ++k) {
                w.field(static_cast<long long>(bundle.path_id(p))).field(ug.index(j)).field(grid.time(ug.index(j)));
                w.field(k).field(grid.time(k)).field(family(p, j, k)).field(1.0 - model.z(p, k));
                w.end_row();
            }
    r.files.emplace_back("family.csv", os.str());
    r.details["paths"] = paths;
    r.details["u_grid"] = ug.indices();
    return r;
}

SuiteResult run_sample_tau(const RunConfig& c) {
    SuiteResult r;
    r.suite = "sample-tau";
    r.seed = c.mc.seed;
    const PairConfig pc = c.pair_config();
    const UGrid ug = UGrid::strided(c.grid.steps, c.mc.u_stride);
    const TimeGrid grid = c.time_grid();
    TauStats tau;
    std::string csv;
    for (int first = 0; first < c.mc.paths; first += c.mc.batch) {
        const int count = std::min(c.mc.batch, c.mc.paths - first);
        const PathBundle bundle = simulate_batch(c, c.mc.seed, first, count);
        const SupermartingaleModel model = generate_z(c.z, bundle);
        const NaturalPair pair = build_y(pc, model, bundle);
        const MartingaleFamily family = build_family(pair, model, ug, {c.tolerances.exact, false});
        const auto samples = sample_tau(family, bundle, c.mc.seed, c.tolerances.exact);
        tau.add(family, model, samples);
        csv += tau_csv_rows(samples, grid, first == 0);
    }
    tau.report(r.report, c.tolerances.sigma);
    r.files.emplace_back("tau.csv", std::move(csv));
    r.files.emplace_back("tau_cdf.csv", tau.csv(ug, grid));
    r.details["paths"] = c.mc.paths;
    return r;
}

SuiteResult run_regularity(const RunConfig& c) {
    SuiteResult r;
    const auto& rc = c.regularity;
    r.suite = "regularity";
    r.seed = rc.seed;
    const StepLaw law = c.step_law();
    const PairConfig pc = c.pair_config();
    ZConfig z = c.z;
    z.sigma_n = rc.sigma_n;
    z.jump_scale = rc.jump_scale;

    const TimeGrid grid(rc.horizon, rc.steps);
    const PathBundle bundle = PathBundle::simulate(grid, law, rc.seed, 0, rc.paths);
    const SupermartingaleModel model = generate_z(z, bundle);
    const NaturalPair pair = build_y(pc, model, bundle);
    RegularityOptions o;
    o.v = grid.index_of(rc.v);
    o.t = grid.index_of(rc.t);
    o.jump_index = grid.index_of(z.jump_time);
    o.strides = rc.strides;
    o.fd_steps = rc.fd_steps;
    const RegularityResult res = family_regularity(pair, model, o);

    const int refinements = int(rc.strides.size()) - 1;
    auto monotone = [&](const std::string& name, const std::vector<double>& v) {
        const int n = count_decreasing(v);
        r.report.add_flag(name, n >= rc.min_monotone,
                          std::to_string(n) + " of " + std::to_string(refinements) + " refinements shrink");
    };
    r.report.add_bound("regularity.jump_identity", res.jump_identity, rc.jump_tolerance);
    monotone("regularity.left_quotient_converges", res.left_residual);
    monotone("regularity.right_quotient_converges", res.right_residual);
    monotone("regularity.right_quotient_at_jump_vanishes", res.jump_right_quotient);
    double order = INFINITY;
    std::vector<double> orders;
    for (std::size_t i = 1; i < res.fd_steps.size(); ++i) {
        const double o2 = std::log(res.fd_error[i - 1] / res.fd_error[i]) / std::log(res.fd_steps[i - 1] / res.fd_steps[i]);
        orders.push_back(o2);
        order = std::min(order, o2);
    }
    if (!orders.empty())
        r.report.add_flag("regularity.finite_difference_order", order >= rc.fd_order,
                          "min observed order " + fmt(order) + ", required " + fmt(rc.fd_order));

    // Continuity of u -> M^u_t: A continuous (delta = 0) against a single atom of A (lambda = 0).
    const TimeGrid cgrid(rc.horizon, rc.continuity_steps);
    const PathBundle cbundle = PathBundle::simulate(cgrid, law, rc.continuity_seed, 0, rc.paths);
    const int jstar = cgrid.index_of(z.jump_time);
    std::ostringstream cos;
    CsvWriter cw(cos);
    cw.header({"case", "stride", "mean_max_jump", "max_jump", "jump_at_t_star", "zero_mass"});
    std::vector<double> mean_jump;
    std::vector<std::vector<double>> atom_jump;
    double zero_mass = 0.0;
    for (int variant = 0; variant < 2; ++variant) {
        ZConfig zc = z;
        if (variant == 0) zc.jump_size = 0.0; else zc.lambda = 0.0;
        const SupermartingaleModel m = generate_z(zc, cbundle);
        const NaturalPair p = build_y(pc, m, cbundle);
        for (int s : rc.continuity_strides) {
            const MartingaleFamily fam =
                build_family(p, m, UGrid::strided(rc.continuity_steps, s), {c.tolerances.exact, false});
            const AbsoluteContinuity ac = absolute_continuity_check(fam, m, rc.continuity_steps);
            const int jp = fam.ugrid().position_of(jstar);
            std::vector<double> jumps(rc.paths);
            double worst_atom = 0.0;
            for (int q = 0; q < rc.paths; ++q) {
                jumps[q] = fam(q, jp, rc.continuity_steps) - fam(q, jp - 1, rc.continuity_steps);
                worst_atom = std::max(worst_atom, std::abs(jumps[q]));
            }
            zero_mass = std::max(zero_mass, ac.zero_mass);
            if (variant == 0) mean_jump.push_back(ac.mean_max_jump); else atom_jump.push_back(jumps);
            cw.field(std::string_view(variant == 0 ? "continuous_A" : "atom_at_t_star")).field(s);
            cw.field(ac.mean_max_jump).field(ac.max_jump).field(worst_atom).field(ac.zero_mass);
            cw.end_row();
        }
    }
    const double factor = mean_jump.front() / mean_jump.back();
    r.report.add_flag("continuity.jumps_vanish_when_A_continuous", factor >= rc.min_factor,
                      "coarse/fine mean largest u-increment " + fmt(factor));
    double drift = 0.0;
    for (std::size_t i = 1; i < atom_jump.size(); ++i)
        for (int q = 0; q < rc.paths; ++q) drift = std::max(drift, std::abs(atom_jump[i][q] - atom_jump[0][q]));
    r.report.add_bound("continuity.jump_at_atom_stable", drift, rc.stability);
    r.report.add_bound("continuity.zero_mass_where_A_flat", zero_mass, c.tolerances.exact);

    std::ostringstream os;
    CsvWriter w(os);
    w.header({"stride", "left_residual", "right_residual", "jump_right_quotient"});
    for (std::size_t i = 0; i < res.strides.size(); ++i) {
        w.field(res.strides[i]).field(res.left_residual[i]).field(res.right_residual[i]).field(res.jump_right_quotient[i]);
        w.end_row();
    }
    std::ostringstream fs;
    CsvWriter fw(fs);
    fw.header({"h", "mean_relative_error"});
    for (std::size_t i = 0; i < res.fd_steps.size(); ++i) {
        fw.field(res.fd_steps[i]).field(res.fd_error[i]);
        fw.end_row();
    }
    r.files.emplace_back("regularity.csv", os.str());
    r.files.emplace_back("finite_difference.csv", fs.str());
    r.files.emplace_back("continuity.csv", cos.str());
    r.details["left_prediction"] = res.left_prediction;
    r.details["right_prediction"] = res.right_prediction;
    r.details["kappa"] = {{"min", res.kappa_min}, {"max", res.kappa_max}};
    r.details["fd_orders"] = orders;
    r.details["continuity_factor"] = factor;
    return r;
}

SuiteResult run_polarize(const RunConfig& c) {
    SuiteResult r;
    r.suite = "polarize";
    r.seed = c.polarization.seed;
    const auto rows = polarization_experiment(c.polarization);
    std::ostringstream os, hs;
    CsvWriter w(os), hw(hs);
    w.header({"horizon", "steps", "interior_fraction", "mass_residual", "initial_member_max", "mean_rho"});
    hw.header({"horizon", "bin_low", "bin_high", "fraction"});
    bool decreasing = true;
    double mass = 0.0;
    std::string trail;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (i > 0 && !(row.interior_fraction < rows[i - 1].interior_fraction)) decreasing = false;
        mass = std::max(mass, row.mass_residual);
        trail += (i ? " " : "") + fmt(row.interior_fraction);
        w.field(row.horizon).field(row.steps).field(row.interior_fraction).field(row.mass_residual);
        w.field(row.initial_member_max).field(row.mean_rho);
        w.end_row();
        const int bins = int(row.histogram.size());
        for (int b = 0; b < bins; ++b) {
            hw.field(row.horizon).field(double(b) / bins).field(double(b + 1) / bins).field(row.histogram[b]);
            hw.end_row();
        }
    }
    r.report.add_flag("polarization.interior_mass_decreases", decreasing, "interior fractions " + trail);
    r.report.add_bound("polarization.mass_conservation", mass, c.tolerances.exact);
    r.files.emplace_back("polarization.csv", os.str());
    r.files.emplace_back("polarization_histogram.csv", hs.str());
    ordered_json table = ordered_json::array();
    for (const auto& row : rows)
        table.push_back({{"T", row.horizon},
                         {"interior_fraction", row.interior_fraction},
                         {"initial_member_max", row.initial_member_max},
                         {"mean_rho", row.mean_rho}});
    r.details["rows"] = table;
    r.details["eta"] = c.polarization.eta;
    return r;
}

SuiteResult run_suite(const std::string& name, const RunConfig& config) {
    if (name == "verify-tree") return run_verify_tree(config);
    if (name == "verify-mc") return run_verify_mc(config);
    if (name == "build-family") return run_build_family(config);
    if (name == "sample-tau") return run_sample_tau(config);
    if (name == "regularity") return run_regularity(config);
    if (name == "polarize") return run_polarize(config);
    throw ConfigError("unknown subcommand " + name);
}

nlohmann::ordered_json summary_json(const SuiteResult& result, const RunConfig& config) {
    ordered_json j;
    j["suite"] = result.suite;
    j["schema"] = config.schema;
    j["pass"] = result.report.passed();
    j["seed"] = result.seed;
    j["config-hash"] = config_hash(config);
    j["checks"] = result.report.to_json();
    ordered_json residuals = ordered_json::object();
    for (const auto& ch : result.report.checks()) {
        if (std::isfinite(ch.residual)) residuals[ch.name] = ch.residual; else residuals[ch.name] = nullptr;
    }
    j["residuals"] = residuals;
    j["details"] = result.details;
    return j;
}

std::vector<std::filesystem::path> write_outputs(const SuiteResult& result, const RunConfig& config,
                                                 const std::filesystem::path& directory) {
    std::filesystem::create_directories(directory);
    std::vector<std::filesystem::path> written;
    auto put = [&](const std::string& name, const std::string& content) {
        const auto path = directory / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write " + path.string());
        out << content;
        written.push_back(path);
    };
    if (config.wants("json")) put(result.suite + ".json", summary_json(result, config).dump(2) + "\n");
    if (config.wants("csv"))
        for (const auto& [name, content] : result.files) put(name, content);
    return written;
}

}  // namespace natural
