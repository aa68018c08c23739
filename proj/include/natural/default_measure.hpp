#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "natural/family.hpp"
#include "natural/natural_pair.hpp"
#include "natural/path_bundle.hpp"
#include "natural/process.hpp"
#include "natural/scenario_tree.hpp"
#include "natural/z_model.hpp"

namespace natural {

/// One draw of tau from the product measure on a path.
struct DefaultSample {
    std::uint64_t path_id = 0;
    int cell = 0;      // u-grid position, or family.size() when tau is beyond the horizon
    int tau = -1;      // grid index, -1 beyond the horizon
    double uniform = 0.0;

    bool beyond_horizon() const { return tau < 0; }
};

/// Inverts u -> M^u_N with one uniform per path (counter-based on the path id); the remaining
/// mass 1 - M^{u_last}_N is the survival atom.  Throws InvalidFamily when the terminal CDF
/// decreases by more than `tolerance`.
std::vector<DefaultSample> sample_tau(const MartingaleFamily& family, const PathBundle& bundle, std::uint64_t seed,
                                      double tolerance = 1e-12);

/// Kernel p(k, v) for tau = u_j < t_k: with a = M^{u_{j-1}}_{k-1} (0 for j = 0) and b = M^{u_j}_{k-1},
/// df/dx(b) when b - a <= atom_tol, else (f(b) - f(a)) / (b - a).  Written into out (size m).
void p_kernel(const NaturalPair& pair, const SupermartingaleModel& model, const MartingaleFamily& family, int p, int k,
              int j, double atom_tol, std::span<double> out);

/// A driver-linear martingale with its branch table.
struct TestMartingale {
    std::string name;
    Process x;
};

/// diffusion, jump, state-dependent and (when the law has the coin) independent test martingales.
std::vector<TestMartingale> test_martingales(const PathBundle& bundle, const SupermartingaleModel& model);

/// Increment of the G-compensator of X at step k on path p, given the tau cell:
/// for tau >= t_k:  (d<M,X> + dB^X) / Z_{k-1} with dB^X = dA E[dX kappa | F_{k-1}];
/// for tau = u_j < t_k:  -d<M,X> / pred(1-Z) + p(k, u_j)^T d<Y,X>.
/// Requires the u-grid to contain every index (the G-information at k-1 needs M^{k-1}).
double compensator_increment(const NaturalPair& pair, const SupermartingaleModel& model,
                             const MartingaleFamily& family, const Process& x, int p, int k, int cell, double atom_tol);

/// Exhaustive check: for every node at k-1 and every G-cell (tau = u_j <= k-1, or tau >= k),
/// the Q-conditional mean of dX - dK.  Cells whose Q-mass relative to the node is at most
/// `negligible_mass` are numerically empty and skipped.
struct TreeEnlargement {
    double max_conditional_mean = 0.0;
    std::int64_t cells = 0;
    std::int64_t skipped = 0;
};
TreeEnlargement tree_enlargement_check(const ScenarioTree& tree, const NaturalPair& pair,
                                       const SupermartingaleModel& model, const MartingaleFamily& family,
                                       const ProductMeasure& measure, const Process& x, double atom_tol,
                                       double negligible_mass = 1e-12);

/// Names of the panel of bounded G_{k-1}-measurable functionals H used against compensated increments.
const std::vector<std::string>& functional_names();

/// Running sums of S_H = sum_k H_{k-1} (dX_k - dK_k), one per functional, over paths.
class EnlargementAccumulator {
  public:
    explicit EnlargementAccumulator(std::string martingale);

    void add_path(std::span<const double> statistics);
    void merge(const EnlargementAccumulator& other);
    const std::string& martingale() const { return name_; }
    std::int64_t paths() const { return count_; }
    double mean(int i) const;
    double standard_error(int i) const;
    /// mean / standard error (0 when the statistic is identically zero).
    double z_score(int i) const;
    double max_abs_compensator = 0.0;

  private:
    std::string name_;
    std::int64_t count_ = 0;
    std::vector<double> sum_;
    std::vector<double> sum2_;
};

/// Accumulates one batch: samples and family must belong to the bundle.
void accumulate_enlargement(const PathBundle& bundle, const SupermartingaleModel& model, const NaturalPair& pair,
                            const MartingaleFamily& family, const std::vector<DefaultSample>& samples,
                            const TestMartingale& x, double atom_tol, EnlargementAccumulator& acc);

/// Increments of u -> M^u_t over consecutive u-cells in (0, t].
struct AbsoluteContinuity {
    double max_ratio = -INFINITY;     // (M^v_t - M^u_t) / (A_v - A_u) where A moves
    double min_ratio = INFINITY;
    double zero_mass = 0.0;           // max |M^v_t - M^u_t| where A_v == A_u
    std::int64_t flat_cells = 0;
    double max_jump = 0.0;            // max over paths and cells of M^v_t - M^u_t
    double mean_max_jump = 0.0;       // path average of the largest cell increment
};
AbsoluteContinuity absolute_continuity_check(const MartingaleFamily& family, const SupermartingaleModel& model, int t);

struct PolarizationOptions {
    std::vector<double> horizons{5.0, 10.0, 20.0, 40.0};
    double dt = 0.1;
    int paths = 10000;
    int u_count = 20;
    double eta = 0.05;
    int bins = 20;
    std::uint64_t seed = 0;
    double jump_probability = 0.25;
    Bump bump{0.5, 0.5, 0.2, 1.0, 0.0, 0.0};
    Loadings loading{1.0, 0.0, 0.0};
    double phi_width = 1.0;
    int ladder_depth = 10;
    int xgrid_resolution = 2048;
};

struct PolarizationRow {
    double horizon = 0.0;
    int steps = 0;
    double interior_fraction = 0.0;  // share of (u, path) with M^u_T in [eta, 1 - eta]
    double mass_residual = 0.0;      // max |M^{u_last}_T + Z_T - 1|
    double initial_member_max = 0.0; // max_p M^0_T (M^0_0 = 1 - Z_0 = 0)
    double mean_rho = 0.0;
    std::vector<double> histogram;   // fractions over equal bins of [0, 1]
};

/// Z_t = exp(-t) (so Z_0 = 1), Y driven by the diffusion proxy, one plateau bump.
std::vector<PolarizationRow> polarization_experiment(const PolarizationOptions& options);

}  // namespace natural
