#include "natural/step_law.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "natural/errors.hpp"

namespace natural {

StepLaw StepLaw::trinomial(double jump_probability) {
    const double q = jump_probability;
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("jump probability must lie in (0, 1)");
    StepLaw law;
    const double side = (1.0 - q) / 2.0;
    law.probabilities_ = {side, side, q};
    const double a = 1.0 / std::sqrt(1.0 - q);  // unit variance
    law.kinds_ = {DriverKind::diffusion, DriverKind::jump};
    law.values_ = {{a, -a, 0.0}, {-q, -q, 1.0 - q}};
    law.jump_probability_ = q;
    return law;
}

StepLaw StepLaw::with_independent_coin() const {
    if (has(DriverKind::independent)) return *this;
    StepLaw law;
    law.jump_probability_ = jump_probability_;
    law.kinds_ = kinds_;
    law.kinds_.push_back(DriverKind::independent);
    law.values_.assign(kinds_.size() + 1, {});
    for (int i = 0; i < branches(); ++i) {
        for (double coin : {1.0, -1.0}) {
            law.probabilities_.push_back(probabilities_[i] / 2.0);
            for (int d = 0; d < drivers(); ++d) law.values_[d].push_back(values_[d][i]);
            law.values_.back().push_back(coin);
        }
    }
    return law;
}

int StepLaw::driver_index(DriverKind kind) const {
    for (int d = 0; d < drivers(); ++d)
        if (kinds_[d] == kind) return d;
    return -1;
}

double StepLaw::mean(int driver) const {
    double m = 0.0;
    for (int i = 0; i < branches(); ++i) m += probabilities_[i] * values_[driver][i];
    return m;
}

double StepLaw::covariance(int d, int e) const {
    double c = 0.0;
    for (int i = 0; i < branches(); ++i) c += probabilities_[i] * values_[d][i] * values_[e][i];
    return c - mean(d) * mean(e);
}

double StepLaw::bound() const {
    double b = 0.0;
    for (const auto& col : values_)
        for (double v : col) b = std::max(b, std::abs(v));
    return b;
}

double StepLaw::min_value(int driver) const {
    return *std::min_element(values_[driver].begin(), values_[driver].end());
}

double StepLaw::max_value(int driver) const {
    return *std::max_element(values_[driver].begin(), values_[driver].end());
}

void StepLaw::validate() const {
    if (branches() < 2 || branches() > 255) throw ConfigError("step law needs between 2 and 255 branches");
    double total = 0.0;
    for (double p : probabilities_) {
        if (!(p > 0.0)) throw ConfigError("step law probabilities must be strictly positive");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-14) throw ConfigError("step law probabilities do not sum to one");
    for (int d = 0; d < drivers(); ++d) {
        if (static_cast<int>(values_[d].size()) != branches()) throw ConfigError("driver column has wrong length");
        if (std::abs(mean(d)) > 1e-15) throw ConfigError("driver increments are not centered");
    }
}

int StepLaw::sample(double uniform) const {
    double acc = 0.0;
    for (int i = 0; i + 1 < branches(); ++i) {
        acc += probabilities_[i];
        if (uniform < acc) return i;
    }
    return branches() - 1;
}

std::string StepLaw::describe() const {
    std::ostringstream os;
    os << branches() << " branches, " << drivers() << " drivers, jump probability " << jump_probability_;
    return os.str();
}

}  // namespace natural
