#pragma once

#include <vector>

namespace natural {

/// Uniform grid t_k = k T / N, k = 0..N.
class TimeGrid {
  public:
    TimeGrid() = default;
    TimeGrid(double horizon, int steps);

    double horizon() const { return horizon_; }
    int steps() const { return steps_; }
    double dt() const { return horizon_ / steps_; }
    double time(int k) const { return horizon_ * k / steps_; }
    std::vector<double> times() const;

    /// Index of a time lying on the grid (within 1e-9 of a grid point); throws ConfigError otherwise.
    int index_of(double t) const;
    bool contains(double t) const;

    bool operator==(const TimeGrid&) const = default;

  private:
    double horizon_ = 1.0;
    int steps_ = 1;
};

}  // namespace natural
