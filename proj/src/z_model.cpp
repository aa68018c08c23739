#include "natural/z_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "natural/errors.hpp"

namespace natural {
namespace {

// Per-branch value of chi = sigma_N sqrt(dt) xi_diffusion + jump_scale xi_jump.
std::vector<double> chi_values(const ZConfig& c, const TimeGrid& grid, const StepLaw& law) {
    const int d = law.driver_index(DriverKind::diffusion);
    const int j = law.driver_index(DriverKind::jump);
    std::vector<double> chi(law.branches(), 0.0);
    for (int i = 0; i < law.branches(); ++i) {
        if (d >= 0) chi[i] += c.sigma_n * std::sqrt(grid.dt()) * law.value(d, i);
        if (j >= 0) chi[i] += c.jump_scale * law.value(j, i);
    }
    return chi;
}

double z_step(double z, double decay, double chi) { return z * decay * (1.0 + (1.0 - z) * chi); }

}  // namespace

std::vector<double> lambda_path(const ZConfig& c, const TimeGrid& grid) {
    std::vector<double> out(grid.steps() + 1);
    const int jump = c.jump_size > 0.0 ? grid.index_of(c.jump_time) : grid.steps() + 1;
    for (int k = 0; k <= grid.steps(); ++k) out[k] = c.lambda * grid.time(k) + (k >= jump ? c.jump_size : 0.0);
    return out;
}

ZRange z_worst_case(const ZConfig& c, const TimeGrid& grid, const StepLaw& law) {
    const auto chi = chi_values(c, grid, law);
    const double lo_chi = *std::min_element(chi.begin(), chi.end());
    const double hi_chi = *std::max_element(chi.begin(), chi.end());
    const auto lam = lambda_path(c, grid);
    double lo = c.z0, hi = c.z0;
    ZRange r{c.z0, c.z0};
    for (int k = 1; k <= grid.steps(); ++k) {
        const double decay = std::exp(-(lam[k] - lam[k - 1]));
        lo = z_step(lo, decay, lo_chi);
        hi = z_step(hi, decay, hi_chi);
        r.lowest = std::min(r.lowest, lo);
        r.highest = std::max(r.highest, hi);
    }
    return r;
}

void validate(const ZConfig& c, const TimeGrid& grid, const StepLaw& law) {
    auto fail = [](const std::string& field, const std::string& msg) { throw ConfigError("z." + field + ": " + msg); };
    if (!(c.epsilon > 0.0 && c.epsilon < 0.5)) fail("epsilon", "must lie in (0, 0.5)");
    if (!(c.z0 > c.epsilon && c.z0 < 1.0 - c.epsilon)) fail("Z0", "must lie in (epsilon, 1 - epsilon)");
    if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda)) fail("lambda", "must be a finite non-negative rate");
    if (!(c.jump_size >= 0.0) || !std::isfinite(c.jump_size)) fail("delta", "must be finite and non-negative");
    if (!(c.sigma_n >= 0.0) || !std::isfinite(c.sigma_n)) fail("sigma_N", "must be finite and non-negative");
    if (!(c.jump_scale >= 0.0) || !std::isfinite(c.jump_scale)) fail("jump_scale", "must be finite and non-negative");
    if (c.jump_size > 0.0) {
        if (!grid.contains(c.jump_time)) fail("t_star", "must be a grid time");
        if (grid.index_of(c.jump_time) < 1) fail("t_star", "must be strictly positive");
    }
    const auto chi = chi_values(c, grid, law);
    for (double x : chi)
        if (!(std::abs(x) < 1.0)) fail("sigma_N", "per-step driver loading reaches 1; N could hit zero");
    const ZRange r = z_worst_case(c, grid, law);
    if (!(r.lowest > c.epsilon) || !(r.highest < 1.0 - c.epsilon))
        fail("epsilon", "Z can leave (epsilon, 1 - epsilon): worst-case range [" + std::to_string(r.lowest) + ", " +
                            std::to_string(r.highest) + "]");
}

Process tilde_m_increments(const Process& m, const Process& pred) {
    Process out(m.paths(), m.steps(), 0.0);
    for (int p = 0; p < m.paths(); ++p)
        for (int k = 1; k <= m.steps(); ++k) {
            const double denom = pred(p, k);
            if (!(denom > 0.0))
                throw HypothesisViolation("predictable projection of 1 - Z is not positive at step " + std::to_string(k));
            out(p, k) = out(p, k - 1) - m.increment(p, k) / denom;
        }
    return out;
}

void complete_model(SupermartingaleModel& model) {
    const int paths = model.paths();
    const int steps = model.steps();
    Process pred(paths, steps);
    for (int p = 0; p < paths; ++p) {
        pred(p, 0) = 1.0 - model.z(p, 0);
        for (int k = 1; k <= steps; ++k) pred(p, k) = 1.0 - model.z(p, k - 1) + model.a.increment(p, k);
    }
    Process tm = tilde_m_increments(model.m, pred);
    const BranchTable& mt = model.m.branches();
    const int b = mt.branches();
    BranchTable tt(paths, steps, b), zt(paths, steps, b), at(paths, steps, b);
    for (int p = 0; p < paths; ++p)
        for (int k = 1; k <= steps; ++k) {
            const double da = model.a.increment(p, k);
            for (int i = 0; i < b; ++i) {
                tt(p, k, i) = -mt(p, k, i) / pred(p, k);
                zt(p, k, i) = mt(p, k, i) - da;
                at(p, k, i) = da;
            }
        }
    tm.set_branches(std::move(tt));
    model.z.set_branches(std::move(zt));
    model.a.set_branches(std::move(at));
    model.tilde_m = std::move(tm);
    model.pred_one_minus_z = std::move(pred);
}

SupermartingaleModel generate_z(const ZConfig& c, const PathBundle& bundle) {
    validate(c, bundle.grid(), bundle.law());
    const auto chi = chi_values(c, bundle.grid(), bundle.law());
    const auto lam = lambda_path(c, bundle.grid());
    const int paths = bundle.paths();
    const int steps = bundle.steps();
    const int b = bundle.branches();
    std::vector<double> decay(steps + 1, 1.0);
    for (int k = 1; k <= steps; ++k) decay[k] = std::exp(-(lam[k] - lam[k - 1]));

    SupermartingaleModel model{Process(paths, steps), Process(paths, steps), Process(paths, steps, 0.0), Process(),
                               Process()};
    BranchTable mt(paths, steps, b);
    for (int p = 0; p < paths; ++p) {
        model.z(p, 0) = c.z0;
        model.m(p, 0) = c.z0;
        for (int k = 1; k <= steps; ++k) {
            const double z = model.z(p, k - 1);
            const double da = z * (1.0 - decay[k]);
            for (int i = 0; i < b; ++i) mt(p, k, i) = z * decay[k] * (1.0 - z) * chi[i];
            const double dm = mt(p, k, bundle.branch(p, k));
            model.a(p, k) = model.a(p, k - 1) + da;
            model.m(p, k) = model.m(p, k - 1) + dm;
            model.z(p, k) = z - da + dm;
        }
    }
    model.m.set_branches(std::move(mt));
    complete_model(model);
    return model;
}

SupermartingaleModel deterministic_model(const std::vector<double>& z_path, const PathBundle& bundle) {
    const int steps = bundle.steps();
    if (static_cast<int>(z_path.size()) != steps + 1) throw ConfigError("deterministic Z needs N + 1 values");
    const int paths = bundle.paths();
    SupermartingaleModel model{Process(paths, steps), Process(paths, steps, z_path[0]), Process(paths, steps, 0.0),
                               Process(), Process()};
    for (int p = 0; p < paths; ++p)
        for (int k = 0; k <= steps; ++k) {
            model.z(p, k) = z_path[k];
            model.a(p, k) = z_path[0] - z_path[k];
        }
    model.m.set_branches(BranchTable(paths, steps, bundle.branches(), 0.0));
    complete_model(model);
    return model;
}

CheckReport check_z_model(const SupermartingaleModel& model, double tol) {
    double recompose = 0.0, identity = 0.0, a0 = 0.0;
    double min_da = INFINITY, min_dm = INFINITY, min_z = INFINITY, max_z = -INFINITY, min_pred = INFINITY;
    for (int p = 0; p < model.paths(); ++p) {
        a0 = std::max(a0, std::abs(model.a(p, 0)));
        for (int k = 0; k <= model.steps(); ++k) {
            recompose = std::max(recompose, std::abs(model.m(p, k) - model.a(p, k) - model.z(p, k)));
            min_z = std::min(min_z, model.z(p, k));
            max_z = std::max(max_z, model.z(p, k));
            if (k == 0) continue;
            min_da = std::min(min_da, model.dA(p, k));
            min_dm = std::min(min_dm, model.dm(p, k));
            min_pred = std::min(min_pred, model.pred(p, k));
            identity = std::max(identity, std::abs(model.pred(p, k) * (1.0 + model.dm(p, k)) - (1.0 - model.z(p, k))));
        }
    }
    CheckReport r;
    r.add_bound("z.recompose_M_minus_A", recompose, tol);
    r.add_bound("z.A0_zero", a0, 0.0);
    r.add_flag("z.A_nondecreasing", min_da >= 0.0, "min dA = " + std::to_string(min_da));
    r.add_flag("z.range_open_unit", min_z > 0.0 && max_z < 1.0,
               "Z in [" + std::to_string(min_z) + ", " + std::to_string(max_z) + "]");
    r.add_flag("z.pred_positive", min_pred > 0.0, "min pred(1-Z) = " + std::to_string(min_pred));
    r.add_bound("z.pred_identity", identity, tol);
    r.add_flag("z.tilde_m_above_minus_one", min_dm > -1.0, "min dm = " + std::to_string(min_dm));
    return r;
}

}  // namespace natural
