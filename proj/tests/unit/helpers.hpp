#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "natural/config.hpp"
#include "natural/process.hpp"

namespace natural::testing {

// Single path process from a list of values.
inline Process path_of(const std::vector<double>& values) {
    Process x(1, static_cast<int>(values.size()) - 1);
    for (std::size_t k = 0; k < values.size(); ++k) x(0, static_cast<int>(k)) = values[k];
    return x;
}

// Single path process with X_0 = 0 and the given increments.
inline Process from_increments(const std::vector<double>& increments) {
    Process x(1, static_cast<int>(increments.size()), 0.0);
    for (std::size_t k = 0; k < increments.size(); ++k)
        x(0, static_cast<int>(k) + 1) = x(0, static_cast<int>(k)) + increments[k];
    return x;
}

// Seeded generator for property tests; each case draws from its own stream.
class Gen {
  public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    // Random-walk process with increments in [lo, hi].
    Process walk(int paths, int steps, double lo, double hi) {
        Process x(paths, steps, 0.0);
        for (int p = 0; p < paths; ++p)
            for (int k = 1; k <= steps; ++k) x(p, k) = x(p, k - 1) + uniform(lo, hi);
        return x;
    }

  private:
    std::mt19937_64 rng_;
};

// Small configuration for fast suite-level tests.
inline RunConfig small_config() {
    RunConfig c = default_config();
    c.mc.paths = 400;
    c.mc.batch = 150;
    c.regularity.paths = 200;
    c.polarization.paths = 300;
    c.polarization.horizons = {2.0, 4.0};
    return c;
}

}  // namespace natural::testing
