#pragma once

#include <optional>
#include <span>
#include <vector>

namespace natural {

/// Increments of a process under every branch of each step, given the step-(k-1) state.
/// Entry (p, k, i) is what Delta_k X would be on path p had branch i been drawn at step k.
class BranchTable {
  public:
    BranchTable() = default;
    BranchTable(int paths, int steps, int branches, double fill = 0.0);

    int paths() const { return paths_; }
    int steps() const { return steps_; }
    int branches() const { return branches_; }

    double& operator()(int p, int k, int i) { return data_[index(p, k, i)]; }
    double operator()(int p, int k, int i) const { return data_[index(p, k, i)]; }
    std::span<const double> at(int p, int k) const { return {data_.data() + index(p, k, 0), size_t(branches_)}; }
    std::span<double> at(int p, int k) { return {data_.data() + index(p, k, 0), size_t(branches_)}; }

  private:
    std::size_t index(int p, int k, int i) const {
        return (static_cast<std::size_t>(p) * steps_ + (k - 1)) * branches_ + i;
    }

    int paths_ = 0;
    int steps_ = 0;
    int branches_ = 0;
    std::vector<double> data_;
};

/// Values of one adapted process on (path x grid index), k = 0..N.
///
/// A process built from the drivers also carries its BranchTable; only such processes
/// have closed-form predictable brackets.
class Process {
  public:
    Process() = default;
    Process(int paths, int steps, double fill = 0.0);

    int paths() const { return paths_; }
    int steps() const { return steps_; }

    double& operator()(int p, int k) { return values_[index(p, k)]; }
    double operator()(int p, int k) const { return values_[index(p, k)]; }
    double increment(int p, int k) const { return (*this)(p, k) - (*this)(p, k - 1); }

    std::span<double> path(int p) { return {values_.data() + index(p, 0), size_t(steps_ + 1)}; }
    std::span<const double> path(int p) const { return {values_.data() + index(p, 0), size_t(steps_ + 1)}; }
    const std::vector<double>& data() const { return values_; }

    bool has_branches() const { return branches_.has_value(); }
    const BranchTable& branches() const;
    BranchTable& branches();
    void set_branches(BranchTable table);

    bool same_shape(const Process& other) const { return paths_ == other.paths_ && steps_ == other.steps_; }

  private:
    std::size_t index(int p, int k) const { return static_cast<std::size_t>(p) * (steps_ + 1) + k; }

    int paths_ = 0;
    int steps_ = 0;
    std::vector<double> values_;
    std::optional<BranchTable> branches_;
};

}  // namespace natural
