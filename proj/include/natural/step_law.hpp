#pragma once

#include <string>
#include <vector>

namespace natural {

enum class DriverKind { diffusion, jump, independent };

/// One-step branching law of the driver increments.
///
/// Every step draws one of `branches()` outcomes with fixed probabilities; each driver
/// is a column of per-branch values with conditional mean exactly zero.  Any process
/// whose increments are predictable combinations of these columns has closed-form
/// conditional moments, which is what brackets and compensators are built from.
class StepLaw {
  public:
    /// Up/down/jump law: diffusion proxy +-1/sqrt(1-q) on the up/down branches, compensated
    /// jump (-q, -q, 1-q).  Both drivers have exactly zero mean and zero cross-moment.
    static StepLaw trinomial(double jump_probability = 0.25);

    /// Product with an independent fair coin carrying a third driver (+-1); doubles the branches.
    StepLaw with_independent_coin() const;

    int branches() const { return static_cast<int>(probabilities_.size()); }
    int drivers() const { return static_cast<int>(kinds_.size()); }
    double probability(int branch) const { return probabilities_[branch]; }
    const std::vector<double>& probabilities() const { return probabilities_; }
    double value(int driver, int branch) const { return values_[driver][branch]; }
    const std::vector<double>& column(int driver) const { return values_[driver]; }
    DriverKind kind(int driver) const { return kinds_[driver]; }
    /// -1 when the law carries no driver of that kind.
    int driver_index(DriverKind kind) const;
    bool has(DriverKind kind) const { return driver_index(kind) >= 0; }
    double jump_probability() const { return jump_probability_; }

    double mean(int driver) const;
    double covariance(int d, int e) const;
    /// max_i |value(d, i)| over all drivers.
    double bound() const;
    double min_value(int driver) const;
    double max_value(int driver) const;

    /// Throws ConfigError unless probabilities are positive, normalized and every driver is centered.
    void validate() const;

    /// Branch selected by a uniform draw in [0, 1).
    int sample(double uniform) const;

    std::string describe() const;

  private:
    std::vector<double> probabilities_;
    std::vector<DriverKind> kinds_;
    std::vector<std::vector<double>> values_;  // [driver][branch]
    double jump_probability_ = 0.0;
};

}  // namespace natural
