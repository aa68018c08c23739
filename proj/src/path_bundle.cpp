#include "natural/path_bundle.hpp"

#include <cmath>
#include <string>

#include "natural/errors.hpp"
#include "natural/rng.hpp"

namespace natural {

PathBundle::PathBundle(TimeGrid grid, StepLaw law, int paths)
    : grid_(grid), law_(std::move(law)), paths_(paths),
      branch_(static_cast<std::size_t>(paths) * grid.steps()), weight_(paths) {
    law_.validate();
}

PathBundle PathBundle::simulate(const TimeGrid& grid, const StepLaw& law, std::uint64_t seed,
                                std::uint64_t first_path, int count) {
    if (count < 1) throw ConfigError("need at least one path");
    PathBundle b(grid, law, count);
    b.seed_ = seed;
    b.first_path_ = first_path;
    const double w = 1.0 / count;
    for (int p = 0; p < count; ++p) {
        const CounterRng rng(seed, first_path + p);
        for (int k = 1; k <= grid.steps(); ++k)
            b.branch_[static_cast<std::size_t>(p) * grid.steps() + (k - 1)] =
                static_cast<std::uint8_t>(law.sample(rng.uniform(rng_stream::branches + k)));
        b.weight_[p] = w;
    }
    return b;
}

PathBundle PathBundle::enumerate(const TimeGrid& grid, const StepLaw& law) {
    const int b = law.branches();
    const int n = grid.steps();
    const double leaves = std::pow(static_cast<double>(b), n);
    if (leaves > 4.0e6) throw ConfigError("tree too large to enumerate: " + std::to_string(leaves) + " leaves");
    const int count = static_cast<int>(leaves);
    PathBundle out(grid, law, count);
    out.exhaustive_ = true;
    for (int p = 0; p < count; ++p) {
        int rest = p;
        double w = 1.0;
        // Most significant digit is step 1, so leaves sharing a prefix are contiguous.
        for (int k = n; k >= 1; --k) {
            const int i = rest % b;
            rest /= b;
            out.branch_[static_cast<std::size_t>(p) * n + (k - 1)] = static_cast<std::uint8_t>(i);
        }
        for (int k = 1; k <= n; ++k) w *= law.probability(out.branch(p, k));
        out.weight_[p] = w;
    }
    return out;
}

}  // namespace natural
