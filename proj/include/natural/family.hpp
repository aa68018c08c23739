#pragma once

#include <span>
#include <vector>

#include "natural/time_grid.hpp"

namespace natural {

/// Increasing list of grid indices at which M^u is solved; always contains 0 and N.
class UGrid {
  public:
    UGrid() = default;
    UGrid(int steps, std::vector<int> indices);
    static UGrid all(int steps);
    /// 0, s, 2s, ..., plus N when s does not divide N.
    static UGrid strided(int steps, int stride);

    int size() const { return static_cast<int>(indices_.size()); }
    int steps() const { return steps_; }
    int index(int j) const { return indices_[j]; }
    const std::vector<int>& indices() const { return indices_; }
    /// Position of grid index k in the u-grid, -1 if absent.
    int position_of(int k) const;
    /// Largest position j with index(j) <= k.
    int last_at_or_before(int k) const;

  private:
    int steps_ = 0;
    std::vector<int> indices_;
};

/// Values M^{u_j}_k per path for k >= u_j (NaN before the start); M^infinity == 1 is implicit.
class MartingaleFamily {
  public:
    MartingaleFamily() = default;
    MartingaleFamily(UGrid ugrid, int paths);

    const UGrid& ugrid() const { return ugrid_; }
    int paths() const { return paths_; }
    int steps() const { return ugrid_.steps(); }
    int size() const { return ugrid_.size(); }

    double& operator()(int p, int j, int k) { return values_[index(p, j, k)]; }
    double operator()(int p, int j, int k) const { return values_[index(p, j, k)]; }
    double terminal(int p, int j) const { return (*this)(p, j, steps()); }
    std::span<double> solution(int p, int j) { return {values_.data() + index(p, j, 0), std::size_t(steps() + 1)}; }
    std::span<const double> solution(int p, int j) const {
        return {values_.data() + index(p, j, 0), std::size_t(steps() + 1)};
    }

  private:
    std::size_t index(int p, int j, int k) const {
        return (static_cast<std::size_t>(p) * ugrid_.size() + j) * (steps() + 1) + k;
    }

    UGrid ugrid_;
    int paths_ = 0;
    std::vector<double> values_;
};

}  // namespace natural
