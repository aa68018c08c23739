#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "natural/family.hpp"
#include "natural/path_bundle.hpp"
#include "natural/process.hpp"
#include "natural/report.hpp"
#include "natural/z_model.hpp"

namespace natural {

/// Finite branching model: every step draws one of b branches of the step law, so the
/// depth-N tree has b^N leaves.  Processes live on the leaf bundle; a node at level k is a
/// block of b^{N-k} consecutive leaves sharing the first k branch digits.
class ScenarioTree {
  public:
    ScenarioTree(const TimeGrid& grid, const StepLaw& law);

    const PathBundle& bundle() const { return bundle_; }
    const TimeGrid& grid() const { return bundle_.grid(); }
    int depth() const { return bundle_.steps(); }
    int branching() const { return bundle_.branches(); }
    int leaves() const { return bundle_.paths(); }
    int nodes(int k) const { return static_cast<int>(power_[k]); }
    int leaves_per_node(int k) const { return static_cast<int>(power_[depth() - k]); }
    int node_of(int leaf, int k) const { return leaf / leaves_per_node(k); }
    int first_leaf(int k, int node) const { return node * leaves_per_node(k); }
    double node_probability(int k, int node) const;
    /// Leaf obtained by replacing the step-k branch digit of `leaf` with `branch`.
    int sibling(int leaf, int k, int branch) const;

    /// E[X | F_k] at every level-k node, summing over descendant leaves.
    std::vector<double> conditional_expectation(std::span<const double> leaf_values, int k) const;
    /// E[X_k | F_{k-1}] at one leaf, summing over the b children of its level-(k-1) node.
    double step_expectation(const Process& x, int leaf, int k) const;
    /// Values of x at level k, one per node.
    std::vector<double> node_values(const Process& x, int k) const;
    /// True when x_k is a function of the level-k node for every k.
    bool is_adapted(const Process& x) const;
    /// Increment table read off the tree: entry (leaf, k, i) = x_k(sibling(leaf, k, i)) - x_{k-1}(leaf).
    BranchTable branch_table(const Process& x) const;

    nlohmann::ordered_json to_json(const std::vector<std::pair<std::string, const Process*>>& processes) const;

  private:
    PathBundle bundle_;
    std::vector<long long> power_;  // b^0 .. b^N
};

/// Exact Doob decomposition Z = M - A; throws NotSupermartingale if some Delta A < 0.
/// M carries its branch table.
std::pair<Process, Process> doob_decompose_exact(const ScenarioTree& tree, const Process& z);

/// Backward construction of a tree supermartingale: leaf values uniform in [leaf_low, leaf_high],
/// inner values Z_{k-1} = E[Z_k | node] + delta(node) with delta(node) = delta_profile[k-1] * f(node),
/// f(node) uniform in [0.5, 1.5].  A zero profile entry makes Delta_k A vanish on every node.
struct TreeZConfig {
    double leaf_low = 0.15;
    double leaf_high = 0.55;
    std::vector<double> delta_profile;
    double epsilon = 1e-3;
    std::uint64_t seed = 0;
};

SupermartingaleModel generate_tree_z(const ScenarioTree& tree, const TreeZConfig& config);

/// Joint law of (leaf, tau-cell): cells 0..U-1 are the u-grid points, cell U is tau = infinity.
class ProductMeasure {
  public:
    ProductMeasure(int leaves, int cells) : leaves_(leaves), cells_(cells), w_(std::size_t(leaves) * cells, 0.0) {}

    int leaves() const { return leaves_; }
    int cells() const { return cells_; }
    double& operator()(int leaf, int cell) { return w_[std::size_t(leaf) * cells_ + cell]; }
    double operator()(int leaf, int cell) const { return w_[std::size_t(leaf) * cells_ + cell]; }

  private:
    int leaves_;
    int cells_;
    std::vector<double> w_;
};

/// w(leaf, j) = P(leaf)(M^{u_j}_N - M^{u_{j-1}}_N) with M^{u_{-1}} = 0, w(leaf, infinity) = P(leaf) Z_N.
/// Throws InvalidFamily when u -> M^u_N decreases by more than `tolerance` on some leaf.
ProductMeasure build_product_measure(const ScenarioTree& tree, const MartingaleFamily& family,
                                     const SupermartingaleModel& model, double tolerance);

/// Normalization, marginal Q = P on leaves, Q[tau <= u | F_t] = M^u_t, Q[tau > t | F_t] = Z_t,
/// and two-way tower consistency for a leaf functional h.
CheckReport verify_product_measure(const ScenarioTree& tree, const MartingaleFamily& family,
                                   const SupermartingaleModel& model, const ProductMeasure& measure,
                                   std::span<const double> h, double tolerance);

/// Axioms of an increasing family bounded by 1 - Z: bounds, start values, monotonicity in u,
/// M^infinity == 1 and the one-step martingale property at every node.
CheckReport verify_im_axioms(const ScenarioTree& tree, const MartingaleFamily& family,
                             const SupermartingaleModel& model, double tolerance);

}  // namespace natural
