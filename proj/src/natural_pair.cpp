#include "natural/natural_pair.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "natural/errors.hpp"
#include "natural/parallel.hpp"

namespace natural {

NaturalPair::NaturalPair(const PairConfig& config, const PathBundle& bundle)
    : spec_(config.spec), grid_(bundle.grid()), paths_(bundle.paths()),
      directions_(candidate_directions(config, bundle)), probabilities_(bundle.law().probabilities()),
      rho_(static_cast<std::size_t>(paths_) * grid_.steps(), 0.0),
      realized_(rho_.size()), worst_(rho_.size()), branch_(rho_.size()) {
    for (int p = 0; p < paths_; ++p)
        for (int k = 1; k <= steps(); ++k) branch_[idx(p, k)] = static_cast<std::uint8_t>(bundle.branch(p, k));
}

void NaturalPair::jump(int p, int k, std::span<double> out) const {
    const double r = rho(p, k);
    const auto& c = directions_[branch(p, k)];
    for (int j = 0; j < dimension(); ++j) out[j] = r * c[j];
}

Process NaturalPair::component(int j) const {
    const int b = static_cast<int>(directions_.size());
    Process y(paths_, steps(), 0.0);
    BranchTable t(paths_, steps(), b);
    for (int p = 0; p < paths_; ++p)
        for (int k = 1; k <= steps(); ++k) {
            const double r = rho(p, k);
            for (int i = 0; i < b; ++i) t(p, k, i) = r * directions_[i][j];
            y(p, k) = y(p, k - 1) + t(p, k, branch(p, k));
        }
    y.set_branches(std::move(t));
    return y;
}

std::vector<std::vector<double>> candidate_directions(const PairConfig& config, const PathBundle& bundle) {
    const int m = config.spec.dimension();
    if (static_cast<int>(config.loadings.size()) != m)
        throw ConfigError("pair.bumps: every bump needs loadings (got " + std::to_string(config.loadings.size()) +
                          " for " + std::to_string(m) + " bumps)");
    const StepLaw& law = bundle.law();
    const int dd = law.driver_index(DriverKind::diffusion);
    const int dj = law.driver_index(DriverKind::jump);
    const int di = law.driver_index(DriverKind::independent);
    const double sq = std::sqrt(bundle.grid().dt());
    std::vector<std::vector<double>> c(law.branches(), std::vector<double>(m, 0.0));
    for (int i = 0; i < law.branches(); ++i)
        for (int j = 0; j < m; ++j) {
            const Loadings& l = config.loadings[j];
            double v = 0.0;
            if (dd >= 0) v += l.diffusion * sq * law.value(dd, i);
            if (dj >= 0) v += l.jump * law.value(dj, i);
            if (di >= 0) v += l.independent * sq * law.value(di, i);
            else if (l.independent != 0.0) throw ConfigError("pair.bumps: independent loading needs the independent coin");
            c[i][j] = v;
        }
    return c;
}

namespace {

void fill_margins(NaturalPair& pair, const MarginTable& table, const SupermartingaleModel& model, int p, int k,
                  double rho, Margins& realized, Margins& worst) {
    const BranchTable& dm = model.tilde_m.branches();
    worst = {INFINITY, INFINITY};
    for (int i = 0; i < table.directions(); ++i) {
        const Margins mg = table.margins(i, dm(p, k, i), model.pred(p, k), rho);
        worst.a = std::min(worst.a, mg.a);
        worst.b = std::min(worst.b, mg.b);
        if (i == pair.branch(p, k)) realized = mg;
    }
}

void check_inputs(const PairConfig& config, const SupermartingaleModel& model, const PathBundle& bundle) {
    if (model.paths() != bundle.paths() || model.steps() != bundle.steps())
        throw ConfigError("build_y: model and bundle have different shapes");
    if (config.ladder_depth < 0 || config.ladder_depth > 60) throw ConfigError("pair.ladder_depth: must lie in [0, 60]");
}

}  // namespace

NaturalPair build_y(const PairConfig& config, const SupermartingaleModel& model, const PathBundle& bundle) {
    check_inputs(config, model, bundle);
    NaturalPair pair(config, bundle);
    const BranchTable& dm = model.tilde_m.branches();
    const int b = bundle.branches();
    for (int k = 1; k <= bundle.steps(); ++k) {
        const MarginTable table(pair.spec_, pair.time(k), pair.directions_);
        parallel_for(bundle.paths(), [&](int begin, int end) {
            double memo_pred = NAN;
            std::vector<double> memo_inf(b);
            for (int p = begin; p < end; ++p) {
                const double pred = model.pred(p, k);
                if (pred != memo_pred) {
                    for (int i = 0; i < b; ++i) memo_inf[i] = table.inf_slope(i, pred);
                    memo_pred = pred;
                }
                double rho = 1.0;
                int level = 0;
                for (;; ++level) {
                    bool ok = true;
                    for (int i = 0; i < b && ok; ++i) {
                        const double base = 1.0 + dm(p, k, i);
                        ok = base - rho * table.sup_abs(i) > 0.0 && base + rho * memo_inf[i] > 0.0;
                    }
                    if (ok) break;
                    if (level == config.ladder_depth) {
                        rho = 0.0;
                        break;
                    }
                    rho *= 0.5;
                }
                pair.rho_[pair.idx(p, k)] = rho;
                Margins& realized = pair.realized_[pair.idx(p, k)];
                Margins& worst = pair.worst_[pair.idx(p, k)];
                worst = {INFINITY, INFINITY};
                for (int i = 0; i < b; ++i) {
                    const double base = 1.0 + dm(p, k, i);
                    const Margins mg{base - rho * table.sup_abs(i), base + rho * memo_inf[i]};
                    worst.a = std::min(worst.a, mg.a);
                    worst.b = std::min(worst.b, mg.b);
                    if (i == pair.branch(p, k)) realized = mg;
                }
            }
        });
    }
    return pair;
}

NaturalPair build_y_fixed(const PairConfig& config, const SupermartingaleModel& model, const PathBundle& bundle,
                          double rho) {
    check_inputs(config, model, bundle);
    NaturalPair pair(config, bundle);
    for (int k = 1; k <= bundle.steps(); ++k) {
        const MarginTable table(pair.spec_, pair.time(k), pair.directions_);
        for (int p = 0; p < bundle.paths(); ++p) {
            pair.rho_[pair.idx(p, k)] = rho;
            fill_margins(pair, table, model, p, k, rho, pair.realized_[pair.idx(p, k)], pair.worst_[pair.idx(p, k)]);
        }
    }
    return pair;
}

void ConditionTally::add(double slack) {
    ++evaluated;
    if (slack < 0.0) ++violations;
    else if (slack == 0.0) ++weak;
    min_slack = std::min(min_slack, slack);
}

void ConditionTally::merge(const ConditionTally& o) {
    evaluated += o.evaluated;
    violations += o.violations;
    weak += o.weak;
    min_slack = std::min(min_slack, o.min_slack);
}

void PairConditions::merge(const PairConditions& o) {
    i.merge(o.i);
    ii.merge(o.ii);
    iii.merge(o.iii);
    form_disagreements += o.form_disagreements;
}

namespace {

struct StepContext {
    const NaturalPair& pair;
    const SupermartingaleModel& model;
    int p;
    int k;
    double dm;
    double pred;
    double t;
    double dy[16];
};

StepContext context(const NaturalPair& pair, const SupermartingaleModel& model, int p, int k) {
    StepContext c{pair, model, p, k, model.dm(p, k), model.pred(p, k), pair.time(k), {}};
    pair.jump(p, k, std::span<double>(c.dy, pair.dimension()));
    return c;
}

void single_conditions(const StepContext& c, double x, double fx, PairConditions& out) {
    const double gap = c.pred - x;
    if (gap != 0.0) out.i.add(c.dm - fx / gap + 1.0);
    if (x != 0.0) out.ii.add(c.dm + fx / x + 1.0);
}

// Below this separation the secant of the one-step map is replaced by its derivative:
// members that coincide in exact arithmetic differ only by rounding, and the difference
// quotient of two rounded values carries no information.
constexpr double coincident = 1e-10;

void pair_condition(const NaturalPair& pair, const StepContext& c, double x, double fx, double xp, double fxp,
                    PairConditions& out) {
    if (x == xp) return;
    if (std::abs(x - xp) <= coincident) {
        const std::span<const double> dy(c.dy, pair.dimension());
        out.iii.add(c.dm + df_dot(pair.spec(), c.t, 0.5 * (x + xp), c.pred, dy) + 1.0);
        return;
    }
    const double slack = c.dm + (fx - fxp) / (x - xp) + 1.0;
    out.iii.add(slack);
    const double map_gap = (x * (1.0 + c.dm) + fx) - (xp * (1.0 + c.dm) + fxp);
    const bool monotone = map_gap * (x - xp) >= 0.0;
    if (monotone != (slack >= 0.0)) ++out.form_disagreements;
}

}  // namespace

PairConditions check_pair_conditions(const NaturalPair& pair, const SupermartingaleModel& model, const Process& x,
                                     const Process* xprime, int from, int to) {
    if (pair.dimension() > 16) throw ConfigError("pair dimension above 16 is not supported");
    PairConditions out;
    for (int p = 0; p < x.paths(); ++p)
        for (int k = std::max(from, 0) + 1; k <= std::min(to, x.steps()); ++k) {
            const double xv = x(p, k - 1);
            if (std::isnan(xv)) continue;
            const StepContext c = context(pair, model, p, k);
            const std::span<const double> dy(c.dy, pair.dimension());
            const double fx = f_dot(pair.spec(), c.t, xv, c.pred, dy);
            single_conditions(c, xv, fx, out);
            if (xprime) {
                const double xp = (*xprime)(p, k - 1);
                if (std::isnan(xp)) continue;
                pair_condition(pair, c, xv, fx, xp, f_dot(pair.spec(), c.t, xp, c.pred, dy), out);
            }
        }
    return out;
}

PairConditions check_family_conditions(const NaturalPair& pair, const SupermartingaleModel& model,
                                       const MartingaleFamily& family, bool all_pairs) {
    if (pair.dimension() > 16) throw ConfigError("pair dimension above 16 is not supported");
    const int paths = family.paths();
    const int chunks = std::min(paths, 64);
    std::vector<PairConditions> parts(chunks);
    parallel_for(chunks, [&](int cb, int ce) {
        std::vector<double> xs, fs;
        for (int chunk = cb; chunk < ce; ++chunk) {
            PairConditions& out = parts[chunk];
            const int p0 = static_cast<int>(static_cast<long long>(paths) * chunk / chunks);
            const int p1 = static_cast<int>(static_cast<long long>(paths) * (chunk + 1) / chunks);
            for (int p = p0; p < p1; ++p)
                for (int k = 1; k <= family.steps(); ++k) {
                    const StepContext c = context(pair, model, p, k);
                    const std::span<const double> dy(c.dy, pair.dimension());
                    xs.clear();
                    fs.clear();
                    for (int j = 0; j < family.size() && family.ugrid().index(j) <= k - 1; ++j) {
                        const double xv = family(p, j, k - 1);
                        xs.push_back(xv);
                        fs.push_back(f_dot(pair.spec(), c.t, xv, c.pred, dy));
                        single_conditions(c, xv, fs.back(), out);
                    }
                    const int n = static_cast<int>(xs.size());
                    for (int a = 0; a < n; ++a)
                        for (int b = a + 1; b < (all_pairs ? n : std::min(n, a + 2)); ++b)
                            pair_condition(pair, c, xs[b], fs[b], xs[a], fs[a], out);
                }
        }
    });
    PairConditions total;
    for (const auto& part : parts) total.merge(part);
    return total;
}

}  // namespace natural
