#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "natural/coefficient.hpp"
#include "natural/default_measure.hpp"
#include "natural/natural_pair.hpp"
#include "natural/step_law.hpp"
#include "natural/time_grid.hpp"
#include "natural/z_model.hpp"

namespace natural {

inline constexpr const char* config_schema = "natural-lab/1";

struct GridConfig {
    double horizon = 2.0;
    int steps = 20;
};

struct LawConfig {
    double jump_probability = 0.25;
    bool independent_coin = true;
};

struct BumpConfig {
    Bump bump;
    Loadings loadings;
};

struct PairSection {
    std::vector<BumpConfig> bumps;
    double phi_width = 1.0;
    int ladder_depth = 10;
    int xgrid_resolution = 2048;
};

struct McConfig {
    int paths = 100000;
    std::uint64_t seed = 12345;
    int batch = 5000;
    int u_stride = 1;
};

struct TreeSection {
    int branching = 3;  // 3: trinomial, 6: trinomial with the independent coin
    int depth = 6;
    double horizon = 1.2;
    double leaf_low = 0.15;
    double leaf_high = 0.55;
    std::vector<double> delta_profile;
    double epsilon = 1e-3;
    std::uint64_t seed = 99;
};

struct Tolerances {
    double exact = 1e-12;        // tree identities and pathwise Monte Carlo bounds
    double enlargement = 1e-10;  // tree conditional means of compensated increments
    double sigma = 3.0;          // statistical checks, in standard errors
    double atom_tol = 1e-12;     // p-kernel gap below which the derivative is used
};

struct RegularitySection {
    double horizon = 2.0;
    int steps = 160;
    int paths = 2000;
    std::uint64_t seed = 2024;
    double v = 0.5;
    double t = 2.0;
    double sigma_n = 0.1;
    double jump_scale = 0.01;
    std::vector<int> strides{16, 8, 4, 2, 1};
    std::vector<double> fd_steps{1e-3, 1e-4, 1e-5};
    int min_monotone = 3;          // refinements (out of strides - 1) that must shrink the residual
    double jump_tolerance = 1e-10;
    double fd_order = 1.5;         // minimum observed order between consecutive h
    int continuity_steps = 80;
    std::vector<int> continuity_strides{4, 2, 1};
    std::uint64_t continuity_seed = 2025;
    double min_factor = 2.0;       // delta = 0: coarse / fine mean largest u-increment
    double stability = 1e-6;       // delta > 0: drift of the jump at t* across refinements
};

struct OutputsConfig {
    std::string directory = "out";
    std::vector<std::string> formats{"json", "csv"};
    int family_paths = 20;  // paths exported by build-family
};

struct RunConfig {
    std::string schema = config_schema;
    GridConfig grid;
    ZConfig z;
    LawConfig law;
    PairSection pair;
    McConfig mc;
    TreeSection tree;
    Tolerances tolerances;
    RegularitySection regularity;
    PolarizationOptions polarization;
    OutputsConfig outputs;

    TimeGrid time_grid() const { return {grid.horizon, grid.steps}; }
    StepLaw step_law() const;
    StepLaw tree_law() const;
    PairConfig pair_config() const;
    bool wants(const std::string& format) const;
};

/// Built-in configuration used when no file is given.
RunConfig default_config();

/// Parse and validate; throws ConfigError naming the offending field. Missing fields keep their defaults.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// Cross-field validation (grids, Z range, pair construction).
void validate(const RunConfig& config);

nlohmann::ordered_json to_json(const RunConfig& config);
/// FNV-1a of the canonical dump without the outputs section.
std::string config_hash(const RunConfig& config);

}  // namespace natural
