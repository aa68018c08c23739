#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "natural/config.hpp"
#include "natural/errors.hpp"
#include "natural/suites.hpp"

namespace {

enum Exit { pass = 0, suite_failure = 1, config_error = 2, internal_error = 3, usage_error = 64 };

struct Options {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    int paths = 0;
};

// --seed and --paths override the values the chosen suite draws from.
void apply_overrides(natural::RunConfig& c, const std::string& suite, const CLI::App& app, const Options& o) {
    const bool seed = app.count("--seed") > 0, paths = app.count("--paths") > 0;
    if (suite == "regularity") {
        if (seed) c.regularity.seed = o.seed;
        if (paths) c.regularity.paths = o.paths;
    } else if (suite == "polarize") {
        if (seed) c.polarization.seed = o.seed;
        if (paths) c.polarization.paths = o.paths;
    } else if (suite == "verify-tree") {
        if (seed) c.tree.seed = o.seed;
    } else {
        if (seed) c.mc.seed = o.seed;
        if (paths) {
            c.mc.paths = o.paths;
            if (suite == "build-family") c.outputs.family_paths = o.paths;
        }
    }
    if (!o.out.empty()) c.outputs.directory = o.out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete-time natural-model lab: build families, sample default times, run verification suites"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--config", o.config, "JSON run configuration (built-in defaults when omitted)");
    app.add_option("--out", o.out, "output directory (overrides outputs.directory)");
    app.add_option("--seed", o.seed, "seed override for the chosen suite");
    app.add_option("--paths", o.paths, "path count override for the chosen suite")->check(CLI::PositiveNumber);
    app.add_flag_callback("--print-default-config", [] {
        std::cout << natural::to_json(natural::default_config()).dump(2) << "\n";
        std::exit(pass);
    }, "print the built-in configuration and exit");
    app.fallthrough();
    const char* help[] = {"exact oracle suite on the scenario tree", "statistical suite on Monte Carlo paths",
                          "export M^u_t slices as CSV", "export default-time samples as CSV",
                          "u-grid refinement sweeps and the jump identity", "polarization experiment"};
    for (std::size_t i = 0; i < natural::suite_names().size(); ++i)
        app.add_subcommand(natural::suite_names()[i], help[i]);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? pass : usage_error;
    }
    const std::string suite = app.get_subcommands().front()->get_name();

    natural::RunConfig config;
    try {
        config = o.config.empty() ? natural::default_config() : natural::load_config(o.config);
        apply_overrides(config, suite, app, o);
        natural::validate(config);
    } catch (const natural::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config_error;
    }

    try {
        const natural::SuiteResult result = natural::run_suite(suite, config);
        const auto files = natural::write_outputs(result, config, config.outputs.directory);
        for (const auto& c : result.report.checks())
            if (!c.passed) std::cerr << "FAILED " << c.name << " residual " << c.residual << " " << c.detail << "\n";
        std::cerr << suite << ": " << result.report.checks().size() - result.report.failures() << "/"
                  << result.report.checks().size() << " checks passed; wrote " << files.size() << " file(s) to "
                  << config.outputs.directory << "\n";
        return result.report.passed() ? pass : suite_failure;
    } catch (const natural::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return internal_error;
    }
}
