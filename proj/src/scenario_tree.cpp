#include "natural/scenario_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "natural/errors.hpp"
#include "natural/rng.hpp"

namespace natural {

ScenarioTree::ScenarioTree(const TimeGrid& grid, const StepLaw& law)
    : bundle_(PathBundle::enumerate(grid, law)), power_(grid.steps() + 1, 1) {
    for (int k = 1; k <= grid.steps(); ++k) power_[k] = power_[k - 1] * law.branches();
}

double ScenarioTree::node_probability(int k, int node) const {
    const int leaf = first_leaf(k, node);
    double w = 1.0;
    for (int j = 1; j <= k; ++j) w *= bundle_.law().probability(bundle_.branch(leaf, j));
    return w;
}

int ScenarioTree::sibling(int leaf, int k, int branch) const {
    const int digit = bundle_.branch(leaf, k);
    return leaf + (branch - digit) * leaves_per_node(k);
}

std::vector<double> ScenarioTree::conditional_expectation(std::span<const double> x, int k) const {
    if (static_cast<int>(x.size()) != leaves()) throw ConfigError("conditional_expectation: one value per leaf required");
    if (k < 0 || k > depth()) throw ConfigError("conditional_expectation: level off the tree");
    std::vector<double> out(nodes(k));
    const int per = leaves_per_node(k);
    for (int n = 0; n < nodes(k); ++n) {
        double num = 0.0, den = 0.0;
        for (int l = n * per; l < (n + 1) * per; ++l) {
            num += bundle_.weight(l) * x[l];
            den += bundle_.weight(l);
        }
        out[n] = num / den;
    }
    return out;
}

double ScenarioTree::step_expectation(const Process& x, int leaf, int k) const {
    const auto& prob = bundle_.law().probabilities();
    double s = 0.0;
    for (int i = 0; i < branching(); ++i) s += prob[i] * x(sibling(leaf, k, i), k);
    return s;
}

std::vector<double> ScenarioTree::node_values(const Process& x, int k) const {
    std::vector<double> out(nodes(k));
    for (int n = 0; n < nodes(k); ++n) out[n] = x(first_leaf(k, n), k);
    return out;
}

bool ScenarioTree::is_adapted(const Process& x) const {
    for (int k = 0; k <= depth(); ++k) {
        const int per = leaves_per_node(k);
        for (int l = 0; l < leaves(); ++l)
            if (x(l, k) != x(l - l % per, k)) return false;
    }
    return true;
}

BranchTable ScenarioTree::branch_table(const Process& x) const {
    BranchTable t(leaves(), depth(), branching());
    for (int l = 0; l < leaves(); ++l)
        for (int k = 1; k <= depth(); ++k)
            for (int i = 0; i < branching(); ++i) t(l, k, i) = x(sibling(l, k, i), k) - x(l, k - 1);
    return t;
}

nlohmann::ordered_json ScenarioTree::to_json(const std::vector<std::pair<std::string, const Process*>>& processes) const {
    nlohmann::ordered_json j;
    j["depth"] = depth();
    j["branching"] = branching();
    j["horizon"] = grid().horizon();
    j["probabilities"] = bundle_.law().probabilities();
    auto nodes_json = nlohmann::ordered_json::array();
    for (int k = 0; k <= depth(); ++k)
        for (int n = 0; n < nodes(k); ++n) {
            nlohmann::ordered_json node;
            node["level"] = k;
            node["index"] = n;
            node["probability"] = node_probability(k, n);
            nlohmann::ordered_json values;
            for (const auto& [name, proc] : processes) values[name] = (*proc)(first_leaf(k, n), k);
            node["values"] = std::move(values);
            nodes_json.push_back(std::move(node));
        }
    j["nodes"] = std::move(nodes_json);
    return j;
}

std::pair<Process, Process> doob_decompose_exact(const ScenarioTree& tree, const Process& z) {
    if (z.paths() != tree.leaves() || z.steps() != tree.depth())
        throw ConfigError("doob_decompose_exact: process does not live on this tree");
    Process m(z.paths(), z.steps()), a(z.paths(), z.steps(), 0.0);
    for (int l = 0; l < tree.leaves(); ++l) {
        m(l, 0) = z(l, 0);
        for (int k = 1; k <= tree.depth(); ++k) {
            double da = z(l, k - 1) - tree.step_expectation(z, l, k);
            // A conditional mean that reproduces z(k-1) up to summation round-off is a martingale step.
            const double roundoff = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(z(l, k - 1)));
            if (da < 0.0 && da >= -roundoff) da = 0.0;
            if (da < 0.0)
                throw NotSupermartingale("Z increases in conditional mean at step " + std::to_string(k) + " (dA = " +
                                         std::to_string(da) + ")");
            a(l, k) = a(l, k - 1) + da;
            m(l, k) = z(l, k) + a(l, k);
        }
    }
    m.set_branches(tree.branch_table(m));
    return {std::move(m), std::move(a)};
}

SupermartingaleModel generate_tree_z(const ScenarioTree& tree, const TreeZConfig& c) {
    const int n = tree.depth();
    if (static_cast<int>(c.delta_profile.size()) != n)
        throw ConfigError("tree.delta_profile: needs one entry per level (" + std::to_string(n) + ")");
    for (double d : c.delta_profile)
        if (!(d >= 0.0) || !std::isfinite(d)) throw ConfigError("tree.delta_profile: entries must be non-negative");
    if (!(c.epsilon > 0.0 && c.epsilon < 0.5)) throw ConfigError("tree.epsilon: must lie in (0, 0.5)");
    if (!(c.leaf_low < c.leaf_high)) throw ConfigError("tree.leaf_low: must be below leaf_high");

    Process z(tree.leaves(), n);
    for (int l = 0; l < tree.leaves(); ++l) {
        const CounterRng rng(c.seed, static_cast<std::uint64_t>(l));
        z(l, n) = c.leaf_low + (c.leaf_high - c.leaf_low) * rng.uniform(rng_stream::auxiliary);
    }
    for (int k = n; k >= 1; --k) {
        const int per = tree.leaves_per_node(k - 1);
        for (int node = 0; node < tree.nodes(k - 1); ++node) {
            const int first = tree.first_leaf(k - 1, node);
            const CounterRng rng(c.seed ^ 0x5deece66dULL, (static_cast<std::uint64_t>(k) << 32) + node);
            const double delta = c.delta_profile[k - 1] * (0.5 + rng.uniform(rng_stream::auxiliary));
            const double value = tree.step_expectation(z, first, k) + delta;
            for (int l = first; l < first + per; ++l) z(l, k - 1) = value;
        }
    }
    for (int l = 0; l < tree.leaves(); ++l)
        for (int k = 0; k <= n; ++k)
            if (!(z(l, k) > c.epsilon && z(l, k) < 1.0 - c.epsilon))
                throw ConfigError("tree: Z leaves (epsilon, 1 - epsilon); lower leaf_high or the delta profile");

    auto [m, a] = doob_decompose_exact(tree, z);
    SupermartingaleModel model{std::move(z), std::move(m), std::move(a), Process(), Process()};
    complete_model(model);
    return model;
}

ProductMeasure build_product_measure(const ScenarioTree& tree, const MartingaleFamily& family,
                                     const SupermartingaleModel& model, double tol) {
    const int n = tree.depth();
    const int u = family.size();
    ProductMeasure q(tree.leaves(), u + 1);
    for (int l = 0; l < tree.leaves(); ++l) {
        const double pl = tree.bundle().weight(l);
        double prev = 0.0;
        for (int j = 0; j < u; ++j) {
            const double cur = family.terminal(l, j);
            if (cur < prev - tol)
                throw InvalidFamily("u -> M^u_N decreases at leaf " + std::to_string(l) + ", u index " +
                                    std::to_string(family.ugrid().index(j)));
            q(l, j) = pl * (cur - prev);
            prev = cur;
        }
        q(l, u) = pl * model.z(l, n);
    }
    return q;
}

CheckReport verify_product_measure(const ScenarioTree& tree, const MartingaleFamily& family,
                                   const SupermartingaleModel& model, const ProductMeasure& q,
                                   std::span<const double> h, double tol) {
    const int n = tree.depth();
    const UGrid& ug = family.ugrid();
    double total = 0.0, min_w = INFINITY, marginal = 0.0;
    for (int l = 0; l < q.leaves(); ++l) {
        double row = 0.0;
        for (int c = 0; c < q.cells(); ++c) {
            row += q(l, c);
            min_w = std::min(min_w, q(l, c));
        }
        total += row;
        marginal = std::max(marginal, std::abs(row - tree.bundle().weight(l)));
    }

    // Q[tau <= u | F_t] and Q[tau > t | F_t] from the joint weights, node by node.
    double cdf = 0.0, survival = 0.0, tower = 0.0;
    for (int t = 0; t <= n; ++t) {
        const int per = tree.leaves_per_node(t);
        for (int node = 0; node < tree.nodes(t); ++node) {
            const int first = tree.first_leaf(t, node);
            double pn = 0.0;
            for (int l = first; l < first + per; ++l) pn += tree.bundle().weight(l);
            for (int j = 0; j < ug.size() && ug.index(j) <= t; ++j) {
                double mass = 0.0, mass_h = 0.0, weighted_h = 0.0;
                for (int l = first; l < first + per; ++l) {
                    for (int c = 0; c <= j; ++c) {
                        mass += q(l, c);
                        mass_h += q(l, c) * h[l];
                    }
                    weighted_h += tree.bundle().weight(l) * h[l] * family.terminal(l, j);
                }
                cdf = std::max(cdf, std::abs(mass / pn - family(first, j, t)));
                tower = std::max(tower, std::abs(mass_h / pn - weighted_h / pn));
            }
            const int jt = ug.last_at_or_before(t);
            if (ug.index(jt) != t) continue;
            double alive = 0.0;
            for (int l = first; l < first + per; ++l)
                for (int c = jt + 1; c < q.cells(); ++c) alive += q(l, c);
            survival = std::max(survival, std::abs(alive / pn - model.z(first, t)));
        }
    }
    CheckReport r;
    r.add_bound("product.total_mass", std::abs(total - 1.0), tol);
    r.add_flag("product.nonnegative", min_w >= -tol, "min weight " + std::to_string(min_w));
    r.add_bound("product.marginal_equals_P", marginal, tol);
    r.add_bound("product.conditional_cdf", cdf, tol);
    r.add_bound("product.survival_equals_Z", survival, tol);
    r.add_bound("product.tower_consistency", tower, tol);
    return r;
}

CheckReport verify_im_axioms(const ScenarioTree& tree, const MartingaleFamily& family,
                             const SupermartingaleModel& model, double tol) {
    const UGrid& ug = family.ugrid();
    const int n = tree.depth();
    double lower = 0.0, upper = 0.0, start = 0.0, monotone = 0.0, mart = 0.0, below_one = 0.0;
    for (int l = 0; l < tree.leaves(); ++l)
        for (int j = 0; j < ug.size(); ++j) {
            const int u = ug.index(j);
            start = std::max(start, std::abs(family(l, j, u) - (1.0 - model.z(l, u))));
            for (int k = u; k <= n; ++k) {
                const double v = family(l, j, k);
                lower = std::max(lower, -v);
                upper = std::max(upper, v - (1.0 - model.z(l, k)));
                below_one = std::max(below_one, v - 1.0);
                if (j > 0) monotone = std::max(monotone, family(l, j - 1, k) - v);
            }
        }
    // One-step martingale property at each node: E[M^u_k | F_{k-1}] = M^u_{k-1}, k > u.
    std::vector<double> tmp(tree.leaves());
    for (int j = 0; j < ug.size(); ++j) {
        const int u = ug.index(j);
        Process slice(tree.leaves(), n, 0.0);
        for (int l = 0; l < tree.leaves(); ++l)
            for (int k = u; k <= n; ++k) slice(l, k) = family(l, j, k);
        for (int k = u + 1; k <= n; ++k) {
            const int per = tree.leaves_per_node(k - 1);
            for (int l = 0; l < tree.leaves(); l += per)
                mart = std::max(mart, std::abs(tree.step_expectation(slice, l, k) - slice(l, k - 1)));
        }
    }
    CheckReport r;
    r.add_bound("im.nonnegative", std::max(lower, 0.0), tol);
    r.add_bound("im.bounded_by_one_minus_Z", std::max(upper, 0.0), tol);
    r.add_bound("im.start_equals_one_minus_Z", start, tol);
    r.add_bound("im.monotone_in_u", std::max(monotone, 0.0), tol);
    r.add_bound("im.below_M_infinity", std::max(below_one, 0.0), tol, "M^infinity == 1 on every node");
    r.add_bound("im.martingale", mart, tol);
    return r;
}

}  // namespace natural
