#include "natural/process.hpp"

#include "natural/errors.hpp"

namespace natural {

BranchTable::BranchTable(int paths, int steps, int branches, double fill)
    : paths_(paths), steps_(steps), branches_(branches),
      data_(static_cast<std::size_t>(paths) * steps * branches, fill) {}

Process::Process(int paths, int steps, double fill)
    : paths_(paths), steps_(steps), values_(static_cast<std::size_t>(paths) * (steps + 1), fill) {
    if (paths < 0 || steps < 1) throw ConfigError("process needs a non-negative path count and at least one step");
}

const BranchTable& Process::branches() const {
    if (!branches_) throw UnsupportedProcess("process carries no branch table");
    return *branches_;
}

BranchTable& Process::branches() {
    if (!branches_) throw UnsupportedProcess("process carries no branch table");
    return *branches_;
}

void Process::set_branches(BranchTable table) {
    if (table.paths() != paths_ || table.steps() != steps_)
        throw ConfigError("branch table shape does not match process");
    branches_ = std::move(table);
}

}  // namespace natural
