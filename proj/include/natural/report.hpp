#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace natural {

/// One named verification outcome.
struct Check {
    std::string name;
    bool passed = false;
    double residual = 0.0;   // observed error or statistic
    double tolerance = 0.0;  // threshold it was compared against
    std::string detail;
};

/// Ordered list of checks; merged and serialized by the CLI suites.
class CheckReport {
  public:
    // Passes when residual <= tolerance (NaN fails).
    Check& add_bound(std::string name, double residual, double tolerance, std::string detail = {});
    Check& add_flag(std::string name, bool passed, std::string detail = {});
    void append(const CheckReport& other, const std::string& prefix = {});

    bool passed() const;
    const std::vector<Check>& checks() const { return checks_; }
    std::vector<Check>& checks() { return checks_; }
    const Check* find(const std::string& name) const;
    std::size_t failures() const;

    nlohmann::ordered_json to_json() const;

  private:
    std::vector<Check> checks_;
};

}  // namespace natural
