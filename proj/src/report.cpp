#include "natural/report.hpp"

#include <cmath>

namespace natural {

Check& CheckReport::add_bound(std::string name, double residual, double tolerance, std::string detail) {
    const bool ok = !std::isnan(residual) && residual <= tolerance;
    checks_.push_back({std::move(name), ok, residual, tolerance, std::move(detail)});
    return checks_.back();
}

Check& CheckReport::add_flag(std::string name, bool passed, std::string detail) {
    checks_.push_back({std::move(name), passed, passed ? 0.0 : 1.0, 0.0, std::move(detail)});
    return checks_.back();
}

void CheckReport::append(const CheckReport& other, const std::string& prefix) {
    for (Check c : other.checks_) {
        if (!prefix.empty()) c.name = prefix + "/" + c.name;
        checks_.push_back(std::move(c));
    }
}

bool CheckReport::passed() const {
    for (const auto& c : checks_)
        if (!c.passed) return false;
    return true;
}

const Check* CheckReport::find(const std::string& name) const {
    for (const auto& c : checks_)
        if (c.name == name) return &c;
    return nullptr;
}

std::size_t CheckReport::failures() const {
    std::size_t n = 0;
    for (const auto& c : checks_) n += c.passed ? 0 : 1;
    return n;
}

nlohmann::ordered_json CheckReport::to_json() const {
    auto out = nlohmann::ordered_json::array();
    for (const auto& c : checks_) {
        nlohmann::ordered_json j;
        j["name"] = c.name;
        j["pass"] = c.passed;
        // JSON has no NaN/inf; those are reported as null.
        if (std::isfinite(c.residual)) j["residual"] = c.residual; else j["residual"] = nullptr;
        if (std::isfinite(c.tolerance)) j["tolerance"] = c.tolerance; else j["tolerance"] = nullptr;
        if (!c.detail.empty()) j["detail"] = c.detail;
        out.push_back(std::move(j));
    }
    return out;
}

}  // namespace natural
