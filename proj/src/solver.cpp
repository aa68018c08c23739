#include "natural/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "natural/calculus.hpp"
#include "natural/errors.hpp"
#include "natural/parallel.hpp"

namespace natural {
namespace {

constexpr int max_dimension = 16;

struct Step {
    double dm;
    double pred;
    double t;
    double dy[max_dimension];
    int m;
    std::span<const double> jump() const { return {dy, std::size_t(m)}; }
};

Step step_data(const NaturalPair& pair, const SupermartingaleModel& model, int p, int k) {
    if (pair.dimension() > max_dimension) throw ConfigError("pair dimension above 16 is not supported");
    Step s{model.dm(p, k), model.pred(p, k), pair.time(k), {}, pair.dimension()};
    pair.jump(p, k, std::span<double>(s.dy, s.m));
    return s;
}

double advance(const NaturalPair& pair, const Step& s, double x) {
    return x * (1.0 + s.dm) + f_dot(pair.spec(), s.t, x, s.pred, s.jump());
}

void check_shapes(const NaturalPair& pair, const SupermartingaleModel& model) {
    if (pair.paths() != model.paths() || pair.steps() != model.steps())
        throw ConfigError("pair and model live on different bundles");
}

}  // namespace

double natural_step(const NaturalPair& pair, const SupermartingaleModel& model, int p, int k, double x) {
    return advance(pair, step_data(pair, model, p, k), x);
}

Process solve_natural(const NaturalPair& pair, const SupermartingaleModel& model, int u, std::span<const double> x) {
    check_shapes(pair, model);
    if (u < 0 || u > model.steps()) throw ConfigError("solve_natural: start index off the grid");
    if (static_cast<int>(x.size()) != model.paths()) throw ConfigError("solve_natural: one start value per path required");
    Process out(model.paths(), model.steps(), std::numeric_limits<double>::quiet_NaN());
    parallel_for(model.paths(), [&](int begin, int end) {
        for (int p = begin; p < end; ++p) {
            out(p, u) = x[p];
            for (int k = u + 1; k <= model.steps(); ++k) out(p, k) = advance(pair, step_data(pair, model, p, k), out(p, k - 1));
        }
    });
    return out;
}

Process solve_natural(const NaturalPair& pair, const SupermartingaleModel& model, int u, double x) {
    const std::vector<double> starts(model.paths(), x);
    return solve_natural(pair, model, u, starts);
}

MartingaleFamily build_family(const NaturalPair& pair, const SupermartingaleModel& model, const UGrid& ugrid,
                              const FamilyOptions& options, CheckReport* report) {
    check_shapes(pair, model);
    if (ugrid.steps() != model.steps()) throw ConfigError("build_family: u-grid and model grid differ");
    const int paths = model.paths();
    const int n = model.steps();
    MartingaleFamily family(ugrid, paths);
    const int chunks = std::max(1, std::min(paths, 64));
    std::vector<double> lower(chunks, 0.0), upper(chunks, 0.0), monotone(chunks, 0.0);
    parallel_for(chunks, [&](int cb, int ce) {
        for (int c = cb; c < ce; ++c) {
            const int p0 = static_cast<int>(static_cast<long long>(paths) * c / chunks);
            const int p1 = static_cast<int>(static_cast<long long>(paths) * (c + 1) / chunks);
            for (int p = p0; p < p1; ++p) {
                if (ugrid.index(0) == 0) family(p, 0, 0) = 1.0 - model.z(p, 0);
                for (int k = 1; k <= n; ++k) {
                    const Step s = step_data(pair, model, p, k);
                    for (int j = 0; j < ugrid.size(); ++j) {
                        const int u = ugrid.index(j);
                        if (u < k) family(p, j, k) = advance(pair, s, family(p, j, k - 1));
                        else if (u == k) family(p, j, k) = 1.0 - model.z(p, k);
                        else break;
                    }
                }
                for (int j = 0; j < ugrid.size(); ++j)
                    for (int k = ugrid.index(j); k <= n; ++k) {
                        const double v = family(p, j, k);
                        lower[c] = std::max(lower[c], -v);
                        upper[c] = std::max(upper[c], v - (1.0 - model.z(p, k)));
                        if (j > 0) monotone[c] = std::max(monotone[c], family(p, j - 1, k) - v);
                    }
            }
        }
    });
    const double lo = *std::max_element(lower.begin(), lower.end());
    const double up = *std::max_element(upper.begin(), upper.end());
    const double mono = *std::max_element(monotone.begin(), monotone.end());
    if (report) {
        report->add_bound("family.nonnegative", lo, options.tolerance);
        report->add_bound("family.bounded_by_one_minus_Z", up, options.tolerance);
        report->add_bound("family.monotone_in_u", mono, options.tolerance);
    }
    if (options.strict && (lo > options.tolerance || up > options.tolerance || mono > options.tolerance))
        throw SolverInconsistency("family violates its bounds or monotonicity: below zero " + std::to_string(lo) +
                                  ", above 1 - Z " + std::to_string(up) + ", decreasing in u " + std::to_string(mono));
    return family;
}

Flow flow_solve(const NaturalPair& pair, const SupermartingaleModel& model, int u, std::span<const double> x) {
    check_shapes(pair, model);
    if (u < 0 || u > model.steps()) throw ConfigError("flow_solve: start index off the grid");
    if (static_cast<int>(x.size()) != model.paths()) throw ConfigError("flow_solve: one start value per path required");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    Flow flow{u, Process(model.paths(), model.steps(), nan), Process(model.paths(), model.steps(), nan)};
    parallel_for(model.paths(), [&](int begin, int end) {
        for (int p = begin; p < end; ++p) {
            flow.xi(p, u) = x[p];
            flow.derivative(p, u) = 1.0;
            for (int k = u + 1; k <= model.steps(); ++k) {
                const Step s = step_data(pair, model, p, k);
                const double prev = flow.xi(p, k - 1);
                flow.xi(p, k) = advance(pair, s, prev);
                flow.derivative(p, k) =
                    flow.derivative(p, k - 1) * (1.0 + s.dm + df_dot(pair.spec(), s.t, prev, s.pred, s.jump()));
            }
        }
    });
    return flow;
}

Process kappa(const NaturalPair& pair, const SupermartingaleModel& model) {
    check_shapes(pair, model);
    Process out(model.paths(), model.steps(), 1.0);
    for (int p = 0; p < model.paths(); ++p)
        for (int k = 1; k <= model.steps(); ++k) {
            const Step s = step_data(pair, model, p, k);
            out(p, k) = 1.0 + s.dm - xg_dot(pair.spec(), s.t, 1.0 - model.z(p, k - 1), s.jump());
        }
    return out;
}

double atom_identity_residual(const MartingaleFamily& family, const SupermartingaleModel& model, const Process& kap) {
    const UGrid& ug = family.ugrid();
    double worst = 0.0;
    for (int j = 0; j + 1 < ug.size(); ++j) {
        const int k = ug.index(j + 1);
        if (ug.index(j) != k - 1) continue;
        for (int p = 0; p < family.paths(); ++p) {
            const double lhs = (1.0 - model.z(p, k)) - family(p, j, k);
            worst = std::max(worst, std::abs(lhs - kap(p, k) * model.dA(p, k)));
        }
    }
    return worst;
}

double gap_affine_residual(const NaturalPair& pair, const SupermartingaleModel& model, const MartingaleFamily& family) {
    const UGrid& ug = family.ugrid();
    const int n = model.steps();
    double worst = 0.0;
    for (int j = 0; j < ug.size(); ++j) {
        const int u = ug.index(j);
        if (u == n) continue;
        Process w(model.paths(), n, 0.0);
        for (int p = 0; p < model.paths(); ++p)
            for (int k = u + 1; k <= n; ++k) {
                const Step s = step_data(pair, model, p, k);
                const double x = family(p, j, k - 1);
                const double gap = s.pred - x;
                const double dw = gap != 0.0 ? s.dm - f_dot(pair.spec(), s.t, x, s.pred, s.jump()) / gap : s.dm;
                w(p, k) = w(p, k - 1) + dw;
            }
        const Process gap = affine_solve(u, 0.0, w, model.a);
        for (int p = 0; p < model.paths(); ++p)
            for (int k = u; k <= n; ++k)
                worst = std::max(worst, std::abs(gap(p, k) - (1.0 - model.z(p, k) - family(p, j, k))));
    }
    return worst;
}

double regularization_residual(const MartingaleFamily& family, const SupermartingaleModel& model) {
    const UGrid& ug = family.ugrid();
    double worst = 0.0;
    for (int p = 0; p < family.paths(); ++p)
        for (int t = 0; t <= family.steps(); ++t) {
            const int last = ug.last_at_or_before(t);
            double running = 1.0 - model.z(p, t);
            for (int j = last; j >= 0; --j) {
                running = std::min(running, std::max(family(p, j, t), 0.0));
                worst = std::max(worst, std::abs(running - family(p, j, t)));
            }
        }
    return worst;
}

double jump_identity_residual(const NaturalPair& pair, const SupermartingaleModel& model, int j, int t) {
    check_shapes(pair, model);
    if (j < 1 || j > t || t > model.steps()) throw ConfigError("jump identity: need 1 <= j <= t <= N");
    const int paths = model.paths();
    const Process kap = kappa(pair, model);
    // The member started one step earlier reaches 1 - Z_j - kappa_j dA_j at j.
    std::vector<double> x_hi(paths), x_lo(paths), x_before(paths);
    for (int p = 0; p < paths; ++p) {
        x_hi[p] = 1.0 - model.z(p, j);
        x_lo[p] = x_hi[p] - kap(p, j) * model.dA(p, j);
        x_before[p] = 1.0 - model.z(p, j - 1);
    }
    const Process mj = solve_natural(pair, model, j, x_hi);
    const Process mj_before = solve_natural(pair, model, j - 1, x_before);
    const Flow lo = flow_solve(pair, model, j, x_lo);
    double worst = 0.0;
    for (int p = 0; p < paths; ++p) {
        const double lhs = mj(p, t) - mj_before(p, t);
        worst = std::max(worst, std::abs(lhs - (mj(p, t) - lo.xi(p, t))));
    }
    return worst;
}

RegularityResult family_regularity(const NaturalPair& pair, const SupermartingaleModel& model,
                                   const RegularityOptions& o) {
    check_shapes(pair, model);
    if (!pair.spec().autonomous()) throw ConfigError("regularity: the coefficient must be autonomous");
    const int n = model.steps();
    const int paths = model.paths();
    if (o.t < 1 || o.t > n) throw ConfigError("regularity: observation index off the grid");
    for (int s : o.strides)
        if (s < 1 || o.v - s < 0 || o.v + s > o.t || o.jump_index - 1 < 0 || o.jump_index + s > o.t)
            throw ConfigError("regularity: stride " + std::to_string(s) + " leaves the grid around v or the jump");

    auto starts = [&](int u) {
        std::vector<double> x(paths);
        for (int p = 0; p < paths; ++p) x[p] = 1.0 - model.z(p, u);
        return x;
    };
    auto member = [&](int u) { return solve_natural(pair, model, u, starts(u)); };
    const Process kap = kappa(pair, model);

    RegularityResult r;
    r.strides = o.strides;
    r.fd_steps = o.fd_steps;
    const Process mv = member(o.v);
    const auto xv = starts(o.v);
    const Flow flow = flow_solve(pair, model, o.v, xv);
    r.kappa_min = INFINITY;
    r.kappa_max = -INFINITY;
    for (int p = 0; p < paths; ++p) {
        const double d = flow.derivative(p, o.t);
        r.left_prediction += d * kap(p, o.v) / paths;
        r.right_prediction += d / paths;
        r.kappa_min = std::min(r.kappa_min, kap(p, o.v));
        r.kappa_max = std::max(r.kappa_max, kap(p, o.v));
    }

    const Process mj = member(o.jump_index);
    for (int s : o.strides) {
        const Process left = member(o.v - s);
        const Process right = member(o.v + s);
        const Process after = member(o.jump_index + s);
        double lres = 0.0, rres = 0.0, jq = 0.0;
        for (int p = 0; p < paths; ++p) {
            const double d = flow.derivative(p, o.t);
            const double da_left = model.a(p, o.v) - model.a(p, o.v - s);
            const double da_right = model.a(p, o.v + s) - model.a(p, o.v);
            const double da_jump = model.a(p, o.jump_index + s) - model.a(p, o.jump_index - 1);
            lres += std::abs((mv(p, o.t) - left(p, o.t)) / da_left - d * kap(p, o.v));
            rres += std::abs((right(p, o.t) - mv(p, o.t)) / da_right - d);
            jq += (after(p, o.t) - mj(p, o.t)) / da_jump;
        }
        r.left_residual.push_back(lres / paths);
        r.right_residual.push_back(rres / paths);
        r.jump_right_quotient.push_back(jq / paths);
    }

    r.jump_identity = jump_identity_residual(pair, model, o.jump_index, o.t);

    for (double h : o.fd_steps) {
        std::vector<double> up(paths), down(paths);
        for (int p = 0; p < paths; ++p) {
            up[p] = xv[p] + h;
            down[p] = xv[p] - h;
        }
        const Process fu = solve_natural(pair, model, o.v, up);
        const Process fdn = solve_natural(pair, model, o.v, down);
        double err = 0.0;
        for (int p = 0; p < paths; ++p) {
            const double d = flow.derivative(p, o.t);
            err += std::abs(d - (fu(p, o.t) - fdn(p, o.t)) / (2.0 * h)) / std::abs(d);
        }
        r.fd_error.push_back(err / paths);
    }
    return r;
}

}  // namespace natural
