#pragma once

#include <span>
#include <vector>

#include "natural/family.hpp"
#include "natural/natural_pair.hpp"
#include "natural/process.hpp"
#include "natural/report.hpp"
#include "natural/z_model.hpp"

namespace natural {

/// One step of the natural equation: x (1 + Delta_k tilde_m) + f(t_k, x; pred_k)^T Delta_k Y.
double natural_step(const NaturalPair& pair, const SupermartingaleModel& model, int p, int k, double x);

/// X_u = x and natural steps for k > u; entries before u are NaN.
Process solve_natural(const NaturalPair& pair, const SupermartingaleModel& model, int u, std::span<const double> x);
Process solve_natural(const NaturalPair& pair, const SupermartingaleModel& model, int u, double x);

struct FamilyOptions {
    double tolerance = 1e-12;
    /// Throw SolverInconsistency when a check exceeds the tolerance (used on the exact tree).
    bool strict = true;
};

/// M^u = solution started from 1 - Z_u for every u in the grid; M^infinity == 1 is implicit.
/// Checks start values, 0 <= M^u <= 1 - Z and monotonicity in u, appending them to `report`.
MartingaleFamily build_family(const NaturalPair& pair, const SupermartingaleModel& model, const UGrid& ugrid,
                              const FamilyOptions& options = {}, CheckReport* report = nullptr);

/// Flow from (u, x) and its x-derivative D_k = D_{k-1}(1 + Delta tilde_m + f'(Xi_{k-1})^T Delta Y), D_u = 1.
struct Flow {
    int u = 0;
    Process xi;
    Process derivative;
};
Flow flow_solve(const NaturalPair& pair, const SupermartingaleModel& model, int u, std::span<const double> x);

/// kappa_k = 1 + Delta_k tilde_m - (1 - Z_{k-1}) g(t_k, 1 - Z_{k-1})^T Delta_k Y, k >= 1 (entry 0 is 1).
Process kappa(const NaturalPair& pair, const SupermartingaleModel& model);

/// max |(1 - Z_k) - M^{k-1}_k - kappa_k Delta_k A| over paths and consecutive u-grid points k-1, k.
double atom_identity_residual(const MartingaleFamily& family, const SupermartingaleModel& model,
                              const Process& kappa_values);

/// 1 - Z - M^u solves the affine equation with Delta W = Delta tilde_m - f(M^u)^T Delta Y / (pred - M^u)
/// and V = A from 0 at u; returns the max deviation from affine_solve over all members.
double gap_affine_residual(const NaturalPair& pair, const SupermartingaleModel& model, const MartingaleFamily& family);

/// Regularized family inf_{v >= u, v <= t} (M^v_t)^+ ^ (1 - Z_t) against M^u_t (max deviation).
double regularization_residual(const MartingaleFamily& family, const SupermartingaleModel& model);

/// max_p |M^j_t - M^{j-1}_t - (Xi^j_t(1 - Z_j) - Xi^j_t(1 - Z_j - kappa_j dA_j))|.
double jump_identity_residual(const NaturalPair& pair, const SupermartingaleModel& model, int j, int t);

struct RegularityOptions {
    int v = 0;               // continuity point (Delta_v A = 0)
    int t = 0;               // observation index
    int jump_index = 0;      // index with Delta A > 0
    std::vector<int> strides;  // u-grid spacings, coarse to fine
    std::vector<double> fd_steps;
};

/// Difference quotients of u -> M^u_t against the flow-derivative predictions, averaged over paths.
struct RegularityResult {
    std::vector<int> strides;
    std::vector<double> left_residual;      // |(M^v - M^{v-s}) / (A_v - A_{v-s}) - D kappa_v|
    std::vector<double> right_residual;     // |(M^{v+s} - M^v) / (A_{v+s} - A_v) - D|
    std::vector<double> jump_right_quotient;  // (M^{j+s} - M^j) / (A_{j+s} - A_{j-1}) at the atom j
    double left_prediction = 0.0;           // mean D kappa_v
    double right_prediction = 0.0;          // mean D
    double jump_identity = 0.0;             // max |M^j_t - M^{j-1}_t - (Xi(1-Z_j) - Xi(1-Z_j - kappa_j dA_j))|
    double kappa_min = 0.0;
    double kappa_max = 0.0;
    std::vector<double> fd_steps;
    std::vector<double> fd_error;           // mean relative |D - central difference|
};

/// Requires an autonomous coefficient.
RegularityResult family_regularity(const NaturalPair& pair, const SupermartingaleModel& model,
                                   const RegularityOptions& options);

}  // namespace natural
