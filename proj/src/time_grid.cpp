#include "natural/time_grid.hpp"

#include <cmath>
#include <string>

#include "natural/errors.hpp"

namespace natural {

TimeGrid::TimeGrid(double horizon, int steps) : horizon_(horizon), steps_(steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw ConfigError("time grid horizon must be positive, got " + std::to_string(horizon));
    if (steps < 1) throw ConfigError("time grid needs at least one step, got " + std::to_string(steps));
}

std::vector<double> TimeGrid::times() const {
    std::vector<double> out(steps_ + 1);
    for (int k = 0; k <= steps_; ++k) out[k] = time(k);
    return out;
}

bool TimeGrid::contains(double t) const {
    const double x = t / dt();
    const double r = std::round(x);
    return r >= 0 && r <= steps_ && std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x));
}

int TimeGrid::index_of(double t) const {
    if (!contains(t)) throw ConfigError("time " + std::to_string(t) + " is not a grid point");
    return static_cast<int>(std::lround(t / dt()));
}

}  // namespace natural
