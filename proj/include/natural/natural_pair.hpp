#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "natural/coefficient.hpp"
#include "natural/family.hpp"
#include "natural/path_bundle.hpp"
#include "natural/process.hpp"
#include "natural/z_model.hpp"

namespace natural {

/// Weights of one Y component on the step-law drivers.  Diffusion and independent drivers
/// are scaled by sqrt(dt); the jump driver is per-step.
struct Loadings {
    double diffusion = 0.0;
    double jump = 0.0;
    double independent = 0.0;
};

struct PairConfig {
    CoefficientSpec spec;
    std::vector<Loadings> loadings;  // one per bump
    int ladder_depth = 10;
};

/// The coefficient together with an m-dimensional martingale Y whose every possible jump is
/// admissible.  Delta_k Y = rho(p, k) c_i on branch i, c_i the candidate direction.
class NaturalPair {
  public:
    NaturalPair(const PairConfig& config, const PathBundle& bundle);

    const CoefficientSpec& spec() const { return spec_; }
    const TimeGrid& grid() const { return grid_; }
    int dimension() const { return spec_.dimension(); }
    int paths() const { return paths_; }
    int steps() const { return grid_.steps(); }
    double time(int k) const { return grid_.time(k); }

    /// Candidate direction c_i (size m) for branch i.
    std::span<const double> direction(int branch) const { return directions_[branch]; }
    const std::vector<std::vector<double>>& directions() const { return directions_; }
    /// Branch probabilities of the step law the pair was built on.
    const std::vector<double>& probabilities() const { return probabilities_; }

    double rho(int p, int k) const { return rho_[idx(p, k)]; }
    /// Margins of the realized jump, and the smallest margins over all branches of the step.
    const Margins& realized_margin(int p, int k) const { return realized_[idx(p, k)]; }
    const Margins& worst_margin(int p, int k) const { return worst_[idx(p, k)]; }
    int branch(int p, int k) const { return branch_[idx(p, k)]; }

    /// Realized Delta_k Y on path p, written into out.
    void jump(int p, int k, std::span<double> out) const;
    /// Y_j as a process with its branch table.
    Process component(int j) const;

  private:
    friend NaturalPair build_y(const PairConfig&, const SupermartingaleModel&, const PathBundle&);
    friend NaturalPair build_y_fixed(const PairConfig&, const SupermartingaleModel&, const PathBundle&, double);
    std::size_t idx(int p, int k) const { return static_cast<std::size_t>(p) * steps() + (k - 1); }

    CoefficientSpec spec_;
    TimeGrid grid_;
    int paths_ = 0;
    std::vector<std::vector<double>> directions_;
    std::vector<double> probabilities_;
    std::vector<double> rho_;
    std::vector<Margins> realized_;
    std::vector<Margins> worst_;
    std::vector<std::uint8_t> branch_;
};

/// Candidate jump directions per branch of the bundle's step law.
std::vector<std::vector<double>> candidate_directions(const PairConfig& config, const PathBundle& bundle);

/// Per step, the largest rho in {1, 1/2, ..., 2^-L, 0} for which rho c_i is admissible on every
/// branch i (each with its own Delta tilde_m).  Scaling preserves the zero conditional mean.
NaturalPair build_y(const PairConfig& config, const SupermartingaleModel& model, const PathBundle& bundle);

/// Fixed scale without the ladder; used for negative controls.
NaturalPair build_y_fixed(const PairConfig& config, const SupermartingaleModel& model, const PathBundle& bundle,
                          double rho);

/// Counts of one pointwise condition.  slack = lhs + 1, which must be > 0 (strict form).
struct ConditionTally {
    std::int64_t evaluated = 0;
    std::int64_t violations = 0;  // lhs < -1
    std::int64_t weak = 0;        // lhs == -1
    double min_slack = INFINITY;

    void add(double slack);
    void merge(const ConditionTally& other);
    bool strict() const { return violations == 0 && weak == 0; }
};

struct PairConditions {
    ConditionTally i;
    ConditionTally ii;
    ConditionTally iii;
    /// Points where (iii) and monotonicity of the one-step map x -> x(1 + dm) + f^T dY disagree.
    std::int64_t form_disagreements = 0;

    void merge(const PairConditions& other);
    bool strict() const { return i.strict() && ii.strict() && iii.strict() && form_disagreements == 0; }
};

/// The three conditions along x (and the pair (x, x') when given), at steps k in (from, to]
/// where the step-(k-1) values are defined (non-NaN).
PairConditions check_pair_conditions(const NaturalPair& pair, const SupermartingaleModel& model, const Process& x,
                                     const Process* xprime, int from, int to);

/// The same over a family: (i), (ii) along every member; (iii) for all pairs of members or,
/// when `all_pairs` is false, for members adjacent in u (sufficient, since the members are
/// ordered and secant slopes of the one-step map compose).
PairConditions check_family_conditions(const NaturalPair& pair, const SupermartingaleModel& model,
                                       const MartingaleFamily& family, bool all_pairs);

}  // namespace natural
