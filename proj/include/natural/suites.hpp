#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "natural/config.hpp"
#include "natural/report.hpp"

namespace natural {

/// Outcome of one CLI subcommand: checks, structured details and CSV files (name, content).
struct SuiteResult {
    std::string suite;
    std::uint64_t seed = 0;
    CheckReport report;
    nlohmann::ordered_json details = nlohmann::ordered_json::object();
    std::vector<std::pair<std::string, std::string>> files;
};

const std::vector<std::string>& suite_names();

SuiteResult run_verify_tree(const RunConfig& config);
SuiteResult run_verify_mc(const RunConfig& config);
SuiteResult run_build_family(const RunConfig& config);
SuiteResult run_sample_tau(const RunConfig& config);
SuiteResult run_regularity(const RunConfig& config);
SuiteResult run_polarize(const RunConfig& config);

/// Dispatch by subcommand name; throws ConfigError for an unknown name.
SuiteResult run_suite(const std::string& name, const RunConfig& config);

/// {suite, checks, pass, residuals, seed, config-hash, details}.
nlohmann::ordered_json summary_json(const SuiteResult& result, const RunConfig& config);

/// Writes <suite>.json and the CSV files selected by outputs.formats; returns the paths written.
std::vector<std::filesystem::path> write_outputs(const SuiteResult& result, const RunConfig& config,
                                                 const std::filesystem::path& directory);

/// Folds a per-batch report into a running one: residuals take the maximum, a check passes only if it
/// passed in every batch.
void merge_max(CheckReport& into, const CheckReport& batch);

}  // namespace natural
