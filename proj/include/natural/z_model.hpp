#pragma once

#include <cstdint>
#include <vector>

#include "natural/path_bundle.hpp"
#include "natural/process.hpp"
#include "natural/report.hpp"

namespace natural {

/// Parameters of Z = N exp(-Lambda) with deterministic Lambda (rate plus one jump).
struct ZConfig {
    double z0 = 0.5;
    double lambda = 0.4;      // decay rate per unit time
    double jump_time = 1.0;   // grid time of the jump of Lambda
    double jump_size = 0.3;   // delta >= 0
    double sigma_n = 0.4;     // diffusion volatility of N
    double jump_scale = 0.15; // loading of the compensated jump driver (per step, not sqrt(dt)-scaled)
    double epsilon = 1e-3;    // Z must stay in (epsilon, 1 - epsilon)
};

/// Z with its exact Doob decomposition and the derived driver of the natural equation.
///
/// Every process is indexed k = 0..N.  For the predictable sequence `pred_one_minus_z`
/// entry k (k >= 1) holds 1 - Z_{k-1} + Delta_k A; entry 0 repeats 1 - Z_0.
/// M and tilde_m carry branch tables so brackets with them are closed-form.
struct SupermartingaleModel {
    Process z;
    Process m;
    Process a;
    Process tilde_m;  // cumulative, tilde_m_0 = 0
    Process pred_one_minus_z;

    int paths() const { return z.paths(); }
    int steps() const { return z.steps(); }
    double dA(int p, int k) const { return a.increment(p, k); }
    double dm(int p, int k) const { return tilde_m.increment(p, k); }
    double pred(int p, int k) const { return pred_one_minus_z(p, k); }
};

/// Worst-case range of Z over all paths (the one-step map is monotone in state and driver).
struct ZRange {
    double lowest = 1.0;
    double highest = 0.0;
};
ZRange z_worst_case(const ZConfig& config, const TimeGrid& grid, const StepLaw& law);

/// Throws ConfigError (with the offending field) when the config is invalid on this grid,
/// including any chance of Z leaving (epsilon, 1 - epsilon).
void validate(const ZConfig& config, const TimeGrid& grid, const StepLaw& law);

/// Cumulative Lambda_k on the grid.
std::vector<double> lambda_path(const ZConfig& config, const TimeGrid& grid);

SupermartingaleModel generate_z(const ZConfig& config, const PathBundle& bundle);

/// Z_k = z_path[k] on every path: M == Z_0, A = Z_0 - Z, tilde_m == 0.  No range validation,
/// so Z_0 = 1 is allowed (1 - Z then starts at zero).
SupermartingaleModel deterministic_model(const std::vector<double>& z_path, const PathBundle& bundle);

/// Delta_k tilde_m = -Delta_k M / pred(1-Z)_k; throws HypothesisViolation if the projection is not positive.
Process tilde_m_increments(const Process& m, const Process& pred_one_minus_z);

/// Builds tilde_m, pred(1-Z) and their branch tables from Z, M, A (M must carry a branch table).
void complete_model(SupermartingaleModel& model);

/// Pathwise invariants: M - A = Z, A predictable nondecreasing with A_0 = 0, 0 < Z < 1,
/// Hy(Z), pred(1-Z)(1 + Delta tilde_m) = 1 - Z, Delta tilde_m > -1.
CheckReport check_z_model(const SupermartingaleModel& model, double tolerance);

}  // namespace natural
