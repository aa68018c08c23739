#include "natural/default_measure.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "natural/errors.hpp"
#include "natural/rng.hpp"
#include "natural/solver.hpp"

namespace natural {

std::vector<DefaultSample> sample_tau(const MartingaleFamily& family, const PathBundle& bundle, std::uint64_t seed,
                                      double tol) {
    if (family.paths() != bundle.paths()) throw ConfigError("sample_tau: family and bundle differ in path count");
    const UGrid& ug = family.ugrid();
    std::vector<DefaultSample> out(family.paths());
    for (int p = 0; p < family.paths(); ++p) {
        double prev = 0.0;
        for (int j = 0; j < ug.size(); ++j) {
            const double cur = family.terminal(p, j);
            if (cur < prev - tol)
                throw InvalidFamily("terminal CDF decreases at path " + std::to_string(bundle.path_id(p)) + ", u index " +
                                    std::to_string(ug.index(j)));
            prev = std::max(prev, cur);
        }
        DefaultSample s;
        s.path_id = bundle.path_id(p);
        s.uniform = CounterRng(seed, s.path_id).uniform(rng_stream::default_time);
        s.cell = ug.size();
        for (int j = 0; j < ug.size(); ++j)
            if (s.uniform < family.terminal(p, j)) {
                s.cell = j;
                s.tau = ug.index(j);
                break;
            }
        out[p] = s;
    }
    return out;
}

void p_kernel(const NaturalPair& pair, const SupermartingaleModel& model, const MartingaleFamily& family, int p, int k,
              int j, double atom_tol, std::span<double> out) {
    if (family.ugrid().index(j) > k - 1) throw ConfigError("p_kernel: needs u_j < t_k");
    const double a = j == 0 ? 0.0 : family(p, j - 1, k - 1);
    const double b = family(p, j, k - 1);
    const double t = pair.time(k);
    const double pred = model.pred(p, k);
    if (b - a <= atom_tol) {
        evaluate_df(pair.spec(), t, b, pred, out);
        return;
    }
    const int m = pair.dimension();
    std::vector<double> fa(m), fb(m);
    evaluate_f(pair.spec(), t, a, pred, fa);
    evaluate_f(pair.spec(), t, b, pred, fb);
    for (int i = 0; i < m; ++i) out[i] = (fb[i] - fa[i]) / (b - a);
}

std::vector<TestMartingale> test_martingales(const PathBundle& bundle, const SupermartingaleModel& model) {
    const StepLaw& law = bundle.law();
    const int dd = law.driver_index(DriverKind::diffusion);
    const int dj = law.driver_index(DriverKind::jump);
    const int di = law.driver_index(DriverKind::independent);
    const double sq = std::sqrt(bundle.grid().dt());
    const int paths = bundle.paths(), n = bundle.steps(), b = bundle.branches();

    auto build = [&](const std::string& name, auto coeff) {
        Process x(paths, n, 0.0);
        BranchTable t(paths, n, b);
        for (int p = 0; p < paths; ++p)
            for (int k = 1; k <= n; ++k) {
                for (int i = 0; i < b; ++i) t(p, k, i) = coeff(p, k, i);
                x(p, k) = x(p, k - 1) + t(p, k, bundle.branch(p, k));
            }
        x.set_branches(std::move(t));
        return TestMartingale{name, std::move(x)};
    };
    std::vector<TestMartingale> out;
    if (dd >= 0) out.push_back(build("diffusion", [&](int, int, int i) { return sq * law.value(dd, i); }));
    if (dj >= 0) out.push_back(build("jump", [&](int, int, int i) { return law.value(dj, i); }));
    if (dd >= 0 && dj >= 0)
        out.push_back(build("state", [&](int p, int k, int i) {
            const double z = model.z(p, k - 1);
            return (0.5 + z) * sq * law.value(dd, i) + (1.0 - z) * law.value(dj, i);
        }));
    if (di >= 0) out.push_back(build("independent", [&](int, int, int i) { return sq * law.value(di, i); }));
    return out;
}

double compensator_increment(const NaturalPair& pair, const SupermartingaleModel& model,
                             const MartingaleFamily& family, const Process& x, int p, int k, int cell,
                             double atom_tol) {
    const UGrid& ug = family.ugrid();
    const BranchTable& mt = model.m.branches();
    const BranchTable& tt = model.tilde_m.branches();
    const BranchTable& xt = x.branches();
    const auto& pr = pair.probabilities();
    const auto& dirs = pair.directions();
    const int b = static_cast<int>(pr.size());
    const int m = pair.dimension();
    if (m > 16) throw ConfigError("pair dimension above 16 is not supported");
    const double rho = pair.rho(p, k);
    double d_mx = 0.0;
    for (int i = 0; i < b; ++i) d_mx += pr[i] * mt(p, k, i) * xt(p, k, i);

    const bool alive = cell >= ug.size() || ug.index(cell) >= k;
    if (alive) {
        // dB^X = dA E[dX kappa | F_{k-1}], kappa evaluated branch by branch.
        const double y = 1.0 - model.z(p, k - 1);
        double g[16];
        for (int j = 0; j < m; ++j) g[j] = pair.spec().g(j, pair.time(k), y);
        double e_xk = 0.0;
        for (int i = 0; i < b; ++i) {
            double gy = 0.0;
            for (int j = 0; j < m; ++j) gy += g[j] * rho * dirs[i][j];
            e_xk += pr[i] * xt(p, k, i) * (1.0 + tt(p, k, i) - y * gy);
        }
        return (d_mx + model.dA(p, k) * e_xk) / model.z(p, k - 1);
    }
    double kernel[16];
    p_kernel(pair, model, family, p, k, cell, atom_tol, std::span<double>(kernel, m));
    double out = -d_mx / model.pred(p, k);
    for (int j = 0; j < m; ++j) {
        double d_yx = 0.0;
        for (int i = 0; i < b; ++i) d_yx += pr[i] * rho * dirs[i][j] * xt(p, k, i);
        out += kernel[j] * d_yx;
    }
    return out;
}

TreeEnlargement tree_enlargement_check(const ScenarioTree& tree, const NaturalPair& pair,
                                       const SupermartingaleModel& model, const MartingaleFamily& family,
                                       const ProductMeasure& q, const Process& x, double atom_tol,
                                       double negligible_mass) {
    const UGrid& ug = family.ugrid();
    if (ug.size() != tree.depth() + 1) throw ConfigError("tree enlargement check needs the full u-grid");
    TreeEnlargement r;
    for (int k = 1; k <= tree.depth(); ++k) {
        const int per = tree.leaves_per_node(k - 1);
        for (int node = 0; node < tree.nodes(k - 1); ++node) {
            const int first = tree.first_leaf(k - 1, node);
            const double pn = tree.node_probability(k - 1, node);
            // Groups: tau = u_j for u_j <= k-1, then {tau >= k} (cells j >= k and infinity).
            for (int group = 0; group <= k; ++group) {
                const int lo = group < k ? group : k;
                const int hi = group < k ? group : q.cells() - 1;
                const double dk = compensator_increment(pair, model, family, x, first, k, group < k ? group : q.cells() - 1,
                                                        atom_tol);
                double mass = 0.0, num = 0.0;
                for (int l = first; l < first + per; ++l)
                    for (int c = lo; c <= hi; ++c) {
                        mass += q(l, c);
                        num += q(l, c) * (x.increment(l, k) - dk);
                    }
                if (mass <= negligible_mass * pn) {
                    ++r.skipped;
                    continue;
                }
                ++r.cells;
                r.max_conditional_mean = std::max(r.max_conditional_mean, std::abs(num / mass));
            }
        }
    }
    return r;
}

const std::vector<std::string>& functional_names() {
    static const std::vector<std::string> names{
        "one",
        "defaulted",
        "alive",
        "defaulted_x_last_diffusion_sign",
        "alive_x_last_diffusion_sign",
        "last_step_jump",
        "jump_seen",
        "z_above_0.3",
        "z_below_0.15",
        "defaulted_x_z",
        "second_half",
        "early_default",
        "diffusion_sum_sign",
        "alive_in_second_half",
        "y1_positive",
        "defaulted_x_tau_fraction",
        "last_coin_sign",
        "diffusion_sign_product",
        "alive_x_z",
        "just_defaulted",
        "alive_x_one_minus_z_squared",
    };
    return names;
}

EnlargementAccumulator::EnlargementAccumulator(std::string martingale)
    : name_(std::move(martingale)), sum_(functional_names().size(), 0.0), sum2_(functional_names().size(), 0.0) {}

void EnlargementAccumulator::add_path(std::span<const double> s) {
    ++count_;
    for (std::size_t i = 0; i < sum_.size(); ++i) {
        sum_[i] += s[i];
        sum2_[i] += s[i] * s[i];
    }
}

void EnlargementAccumulator::merge(const EnlargementAccumulator& o) {
    count_ += o.count_;
    for (std::size_t i = 0; i < sum_.size(); ++i) {
        sum_[i] += o.sum_[i];
        sum2_[i] += o.sum2_[i];
    }
    max_abs_compensator = std::max(max_abs_compensator, o.max_abs_compensator);
}

double EnlargementAccumulator::mean(int i) const { return count_ ? sum_[i] / count_ : 0.0; }

double EnlargementAccumulator::standard_error(int i) const {
    if (count_ < 2) return 0.0;
    const double mu = mean(i);
    const double var = std::max(0.0, (sum2_[i] - count_ * mu * mu) / (count_ - 1));
    return std::sqrt(var / count_);
}

double EnlargementAccumulator::z_score(int i) const {
    const double se = standard_error(i);
    if (se == 0.0) return mean(i) == 0.0 ? 0.0 : INFINITY;
    return mean(i) / se;
}

void accumulate_enlargement(const PathBundle& bundle, const SupermartingaleModel& model, const NaturalPair& pair,
                            const MartingaleFamily& family, const std::vector<DefaultSample>& samples,
                            const TestMartingale& x, double atom_tol, EnlargementAccumulator& acc) {
    const UGrid& ug = family.ugrid();
    if (ug.size() != bundle.steps() + 1) throw ConfigError("enlargement statistics need the full u-grid");
    const StepLaw& law = bundle.law();
    const int dd = law.driver_index(DriverKind::diffusion);
    const int dj = law.driver_index(DriverKind::jump);
    const int di = law.driver_index(DriverKind::independent);
    const int n = bundle.steps();
    const int nf = static_cast<int>(functional_names().size());
    std::vector<double> stats(nf), h(nf), dy(pair.dimension());
    auto sign = [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); };

    for (int p = 0; p < bundle.paths(); ++p) {
        const DefaultSample& s = samples[p];
        std::fill(stats.begin(), stats.end(), 0.0);
        bool jump_seen = false;
        double diff_sum = 0.0, y1 = 0.0, last_sign = 0.0, prev_sign = 0.0, last_jump = 0.0, last_coin = 0.0;
        for (int k = 1; k <= n; ++k) {
            const int km = k - 1;
            const bool defaulted = !s.beyond_horizon() && s.tau <= km;
            const double d = defaulted ? 1.0 : 0.0;
            const double a = 1.0 - d;
            const double z = model.z(p, km);
            h[0] = 1.0;
            h[1] = d;
            h[2] = a;
            h[3] = d * last_sign;
            h[4] = a * last_sign;
            h[5] = last_jump;
            h[6] = jump_seen ? 1.0 : 0.0;
            h[7] = z > 0.3 ? 1.0 : 0.0;
            h[8] = z < 0.15 ? 1.0 : 0.0;
            h[9] = d * z;
            h[10] = 2 * km >= n ? 1.0 : 0.0;
            h[11] = (defaulted && 4 * s.tau <= n) ? 1.0 : 0.0;
            h[12] = sign(diff_sum);
            h[13] = a * h[10];
            h[14] = y1 > 0.0 ? 1.0 : 0.0;
            h[15] = defaulted ? static_cast<double>(s.tau) / n : 0.0;
            h[16] = last_coin;
            h[17] = last_sign * prev_sign;
            h[18] = a * z;
            h[19] = (defaulted && s.tau == km) ? 1.0 : 0.0;
            h[20] = a * (1.0 - z) * (1.0 - z);

            const double dk = compensator_increment(pair, model, family, x.x, p, k, s.cell, atom_tol);
            acc.max_abs_compensator = std::max(acc.max_abs_compensator, std::abs(dk));
            const double e = x.x.increment(p, k) - dk;
            for (int i = 0; i < nf; ++i) stats[i] += h[i] * e;

            const int br = bundle.branch(p, k);
            prev_sign = last_sign;
            last_sign = dd >= 0 ? sign(law.value(dd, br)) : 0.0;
            diff_sum += dd >= 0 ? law.value(dd, br) : 0.0;
            last_jump = (dj >= 0 && law.value(dj, br) > 0.0) ? 1.0 : 0.0;
            jump_seen = jump_seen || last_jump > 0.0;
            last_coin = di >= 0 ? sign(law.value(di, br)) : 0.0;
            pair.jump(p, k, dy);
            if (!dy.empty()) y1 += dy[0];
        }
        acc.add_path(stats);
    }
}

AbsoluteContinuity absolute_continuity_check(const MartingaleFamily& family, const SupermartingaleModel& model, int t) {
    const UGrid& ug = family.ugrid();
    AbsoluteContinuity r;
    double sum_max = 0.0;
    for (int p = 0; p < family.paths(); ++p) {
        double path_max = 0.0;
        for (int j = 1; j < ug.size() && ug.index(j) <= t; ++j) {
            const double dm = family(p, j, t) - family(p, j - 1, t);
            const double da = model.a(p, ug.index(j)) - model.a(p, ug.index(j - 1));
            path_max = std::max(path_max, dm);
            if (da == 0.0) {
                r.zero_mass = std::max(r.zero_mass, std::abs(dm));
                ++r.flat_cells;
            } else {
                r.max_ratio = std::max(r.max_ratio, dm / da);
                r.min_ratio = std::min(r.min_ratio, dm / da);
            }
        }
        r.max_jump = std::max(r.max_jump, path_max);
        sum_max += path_max;
    }
    r.mean_max_jump = family.paths() ? sum_max / family.paths() : 0.0;
    return r;
}

std::vector<PolarizationRow> polarization_experiment(const PolarizationOptions& o) {
    if (o.paths < 1 || o.u_count < 1 || o.bins < 1) throw ConfigError("polarization: paths, u_count and bins must be positive");
    if (!(o.eta > 0.0 && o.eta < 0.5)) throw ConfigError("polarization.eta: must lie in (0, 0.5)");
    std::vector<PolarizationRow> rows;
    const StepLaw law = StepLaw::trinomial(o.jump_probability);
    for (double horizon : o.horizons) {
        const int n = static_cast<int>(std::lround(horizon / o.dt));
        if (n < o.u_count) throw ConfigError("polarization: horizon too short for the u-grid");
        const TimeGrid grid(horizon, n);
        const PathBundle bundle = PathBundle::simulate(grid, law, o.seed, 0, o.paths);
        std::vector<double> zpath(n + 1);
        for (int k = 0; k <= n; ++k) zpath[k] = std::exp(-grid.time(k));
        const SupermartingaleModel model = deterministic_model(zpath, bundle);
        const PairConfig cfg{CoefficientSpec({o.bump}, Clamp(o.phi_width), o.xgrid_resolution), {o.loading},
                             o.ladder_depth};
        const NaturalPair pair = build_y(cfg, model, bundle);

        std::vector<int> idx;
        for (int i = 0; i <= o.u_count; ++i) {
            const int u = static_cast<int>(std::lround(static_cast<double>(i) * n / o.u_count));
            if (idx.empty() || idx.back() != u) idx.push_back(u);
        }
        const MartingaleFamily family = build_family(pair, model, UGrid(n, idx), FamilyOptions{1e-12, false});

        PolarizationRow row;
        row.horizon = horizon;
        row.steps = n;
        row.histogram.assign(o.bins, 0.0);
        std::int64_t interior = 0, total = 0;
        for (int p = 0; p < o.paths; ++p) {
            for (int j = 0; j < family.size(); ++j) {
                const double v = family.terminal(p, j);
                ++total;
                if (v >= o.eta && v <= 1.0 - o.eta) ++interior;
                const int bin = std::clamp(static_cast<int>(v * o.bins), 0, o.bins - 1);
                row.histogram[bin] += 1.0;
            }
            row.mass_residual =
                std::max(row.mass_residual, std::abs(family.terminal(p, family.size() - 1) + zpath[n] - 1.0));
            row.initial_member_max = std::max(row.initial_member_max, family.terminal(p, 0));
            for (int k = 1; k <= n; ++k) row.mean_rho += pair.rho(p, k);
        }
        row.mean_rho /= static_cast<double>(o.paths) * n;
        row.interior_fraction = static_cast<double>(interior) / total;
        for (double& hcount : row.histogram) hcount /= total;
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace natural
