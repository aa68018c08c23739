#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "natural/errors.hpp"
#include "natural/suites.hpp"

namespace natural {
namespace {

using testing::small_config;

void expect_passes(const SuiteResult& r) {
    EXPECT_TRUE(r.report.passed()) << r.suite;
    for (const auto& c : r.report.checks()) EXPECT_TRUE(c.passed) << r.suite << " " << c.name << " " << c.residual;
}

TEST(Suites, VerifyTreePassesWithExactResiduals) {
    const RunConfig c = small_config();
    const SuiteResult r = run_verify_tree(c);
    expect_passes(r);
    EXPECT_EQ(r.seed, c.tree.seed);
    ASSERT_NE(r.report.find("atom_identity"), nullptr);
    EXPECT_LE(r.report.find("atom_identity")->residual, c.tolerances.exact);
}

TEST(Suites, SmallMonteCarloRunsPass) {
    const RunConfig c = small_config();
    for (const char* name : {"verify-mc", "build-family", "sample-tau"}) expect_passes(run_suite(name, c));
}

TEST(Suites, UnknownSuiteIsAConfigError) { EXPECT_THROW(run_suite("bogus", small_config()), ConfigError); }

TEST(Suites, SummaryAndFiles) {
    RunConfig c = small_config();
    const SuiteResult r = run_suite("build-family", c);
    const auto j = summary_json(r, c);
    for (const char* key : {"suite", "schema", "pass", "seed", "config-hash", "checks", "residuals", "details"})
        EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(j["config-hash"], config_hash(c));
    const auto dir = std::filesystem::temp_directory_path() / "natural_suite_test";
    std::filesystem::remove_all(dir);
    const auto written = write_outputs(r, c, dir);
    EXPECT_TRUE(std::filesystem::exists(dir / "build-family.json"));
    EXPECT_TRUE(std::filesystem::exists(dir / "family.csv"));
    std::ifstream in(dir / "family.csv");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "path,u_index,u,t_index,t,M,one_minus_Z\r");

    c.outputs.formats = {"json"};
    std::filesystem::remove_all(dir);
    write_outputs(r, c, dir);
    EXPECT_FALSE(std::filesystem::exists(dir / "family.csv"));
    std::filesystem::remove_all(dir);
}

TEST(Suites, MergeKeepsWorstResidualAndAnyFailure) {
    CheckReport a, b;
    a.add_bound("x", 1e-13, 1e-12);
    b.add_bound("x", 1e-11, 1e-12);
    merge_max(a, b);
    ASSERT_NE(a.find("x"), nullptr);
    EXPECT_EQ(a.find("x")->residual, 1e-11);
    EXPECT_FALSE(a.find("x")->passed);
}

}  // namespace
}  // namespace natural
