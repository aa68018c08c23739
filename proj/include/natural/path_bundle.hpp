#pragma once

#include <cstdint>
#include <vector>

#include "natural/step_law.hpp"
#include "natural/time_grid.hpp"

namespace natural {

/// The set of paths every process lives on: realized branch per (path, step) plus a weight.
///
/// Monte Carlo bundles carry equal weights 1/P; an enumerated bundle holds every leaf of the
/// scenario tree in lexicographic order with its exact probability.
class PathBundle {
  public:
    static PathBundle simulate(const TimeGrid& grid, const StepLaw& law, std::uint64_t seed,
                               std::uint64_t first_path, int count);
    static PathBundle enumerate(const TimeGrid& grid, const StepLaw& law);

    const TimeGrid& grid() const { return grid_; }
    const StepLaw& law() const { return law_; }
    int paths() const { return paths_; }
    int steps() const { return grid_.steps(); }
    int branches() const { return law_.branches(); }
    bool exhaustive() const { return exhaustive_; }
    std::uint64_t seed() const { return seed_; }

    int branch(int p, int k) const { return branch_[static_cast<std::size_t>(p) * steps() + (k - 1)]; }
    double driver(int p, int k, int d) const { return law_.value(d, branch(p, k)); }
    double weight(int p) const { return weight_[p]; }
    const std::vector<double>& weights() const { return weight_; }
    std::uint64_t path_id(int p) const { return first_path_ + static_cast<std::uint64_t>(p); }

  private:
    PathBundle(TimeGrid grid, StepLaw law, int paths);

    TimeGrid grid_;
    StepLaw law_;
    int paths_ = 0;
    bool exhaustive_ = false;
    std::uint64_t seed_ = 0;
    std::uint64_t first_path_ = 0;
    std::vector<std::uint8_t> branch_;
    std::vector<double> weight_;
};

}  // namespace natural
