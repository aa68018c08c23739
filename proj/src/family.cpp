#include "natural/family.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "natural/errors.hpp"

namespace natural {

UGrid::UGrid(int steps, std::vector<int> indices) : steps_(steps), indices_(std::move(indices)) {
    if (steps < 1) throw ConfigError("u-grid needs a grid with at least one step");
    if (indices_.empty() || indices_.front() != 0 || indices_.back() != steps)
        throw ConfigError("u-grid must start at 0 and end at N");
    for (std::size_t j = 1; j < indices_.size(); ++j)
        if (indices_[j] <= indices_[j - 1]) throw ConfigError("u-grid indices must be strictly increasing");
}

UGrid UGrid::all(int steps) { return strided(steps, 1); }

UGrid UGrid::strided(int steps, int stride) {
    if (stride < 1) throw ConfigError("u-grid stride must be positive, got " + std::to_string(stride));
    std::vector<int> idx;
    for (int k = 0; k <= steps; k += stride) idx.push_back(k);
    if (idx.back() != steps) idx.push_back(steps);
    return UGrid(steps, std::move(idx));
}

int UGrid::position_of(int k) const {
    const auto it = std::lower_bound(indices_.begin(), indices_.end(), k);
    return (it != indices_.end() && *it == k) ? static_cast<int>(it - indices_.begin()) : -1;
}

int UGrid::last_at_or_before(int k) const {
    const auto it = std::upper_bound(indices_.begin(), indices_.end(), k);
    return static_cast<int>(it - indices_.begin()) - 1;
}

MartingaleFamily::MartingaleFamily(UGrid ugrid, int paths)
    : ugrid_(std::move(ugrid)), paths_(paths),
      values_(static_cast<std::size_t>(paths) * ugrid_.size() * (ugrid_.steps() + 1),
              std::numeric_limits<double>::quiet_NaN()) {}

}  // namespace natural
