// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "natural/calculus.hpp"
#include "natural/config.hpp"
#include "natural/suites.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace natural;

namespace {

// Pinned acceptance constants.
constexpr int affine_instances = 1000;
constexpr int affine_steps = 1000;
constexpr double affine_dw = 0.02;  // |Delta W| bound of the random instances
constexpr double affine_tol = 1e-12;
constexpr double affine_seconds = 5.0;
constexpr int tree_branching = 3;
constexpr int tree_depth = 6;
constexpr double exact_tol = 1e-12;
constexpr double tree_seconds = 10.0;
constexpr int mc_paths = 100000;
constexpr double tree_enlargement_tol = 1e-10;
constexpr double sigma_bound = 3.0;
constexpr int min_functionals = 20;
constexpr int min_martingales = 2;
constexpr double jump_identity_tol = 1e-10;
constexpr int min_monotone = 3;
constexpr double min_fd_order = 1.5;
constexpr double continuity_factor = 2.0;
constexpr double atom_stability = 1e-6;
constexpr double flat_mass_tol = 1e-12;
constexpr int polarization_paths = 10000;
constexpr double polarization_seconds = 120.0;

struct Outcome {
    bool pass = false;
    std::string summary;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

// Rows of a CSV produced by the suites (CRLF records, no quoted fields in numeric tables).
std::vector<std::map<std::string, std::string>> csv_rows(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> names;
    std::vector<std::map<std::string, std::string>> rows;
    auto split = [](std::string s) {
        if (!s.empty() && s.back() == '\r') s.pop_back();
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        return out;
    };
    if (std::getline(in, line)) names = split(line);
    while (std::getline(in, line)) {
        const auto cells = split(line);
        if (cells.empty()) continue;
        std::map<std::string, std::string> row;
        for (std::size_t i = 0; i < names.size() && i < cells.size(); ++i) row[names[i]] = cells[i];
        rows.push_back(std::move(row));
    }
    return rows;
}

const std::string& file_of(const SuiteResult& r, const std::string& name) {
    for (const auto& [n, content] : r.files)
        if (n == name) return content;
    throw std::runtime_error(r.suite + " produced no " + name);
}

const Check& check_of(const CheckReport& r, const std::string& name) {
    const Check* c = r.find(name);
    if (!c) throw std::runtime_error("missing check " + name);
    return *c;
}

const json& json_check(const json& summary, const std::string& name) {
    for (const auto& c : summary["checks"])
        if (c["name"] == name) return c;
    throw std::runtime_error("missing check " + name + " in " + summary.value("suite", "?"));
}

bool conditions_strict(const json& conditions, double& min_slack) {
    bool ok = true;
    min_slack = INFINITY;
    for (const char* k : {"i", "ii", "iii"}) {
        const json& c = conditions[k];
        ok = ok && c["evaluated"].get<long long>() > 0 && c["violations"].get<long long>() == 0 &&
             c["weak"].get<long long>() == 0 && c["min_slack"].get<double>() > 0.0;
        min_slack = std::min(min_slack, c["min_slack"].get<double>());
    }
    return ok;
}

Outcome criterion_affine() {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> dw(-affine_dw, affine_dw), dv(-0.01, 0.01), start(-1.0, 1.0);
    Process w(affine_instances, affine_steps, 0.0), v(affine_instances, affine_steps, 0.0);
    std::vector<double> a(affine_instances);
    for (int p = 0; p < affine_instances; ++p) {
        a[p] = start(rng);
        for (int k = 1; k <= affine_steps; ++k) {
            w(p, k) = w(p, k - 1) + dw(rng);
            v(p, k) = v(p, k - 1) + dv(rng);
        }
    }
    const auto t0 = std::chrono::steady_clock::now();
    const Process x = affine_solve(0, a, w, v);
    const Process y = affine_recursion(0, a, w, v);
    const double elapsed = seconds_since(t0);
    double err = 0.0;
    for (int p = 0; p < affine_instances; ++p)
        for (int k = 0; k <= affine_steps; ++k) err = std::max(err, std::abs(x(p, k) - y(p, k)));
    return {err <= affine_tol && elapsed < affine_seconds,
            "affine explicit formula vs recursion: " + std::to_string(affine_instances) + " instances, N = " +
                std::to_string(affine_steps) + ", max error " + fmt("%.3g", err) + " (<= 1e-12), " +
                fmt("%.2f", elapsed) + " s (< 5 s)"};
}

Outcome criterion_tree(const SuiteResult& tree, double elapsed) {
    double worst = 0.0;
    bool ok = tree.report.passed();
    int counted = 0;
    for (const auto& c : tree.report.checks()) {
        if (c.name.rfind("im.", 0) != 0 && c.name.rfind("product.", 0) != 0) continue;
        ++counted;
        ok = ok && c.passed && c.residual <= exact_tol;
        worst = std::max(worst, c.residual);
    }
    const double qp = check_of(tree.report, "product.marginal_equals_P").residual;
    ok = ok && counted >= 12 && elapsed < tree_seconds;
    return {ok, "tree oracle (b = 3, depth 6): " + std::to_string(tree.report.checks().size()) +
                    " checks passed, family and product-measure residual " + fmt("%.3g", worst) +
                    " (<= 1e-12), Q = P residual " + fmt("%.3g", qp) + ", " + fmt("%.2f", elapsed) + " s (< 10 s)"};
}

Outcome criterion_strictness(const SuiteResult& tree, const json& mc) {
    double tree_slack = 0.0, mc_slack = 0.0;
    const bool tree_ok = conditions_strict(tree.details["conditions"], tree_slack) &&
                         check_of(tree.report, "pair.realized_jumps_admissible").passed &&
                         tree.details["ladder"]["min_realized_margin_a"].get<double>() > 0.0 &&
                         tree.details["ladder"]["min_realized_margin_b"].get<double>() > 0.0;
    const json& ladder = mc["details"]["ladder"];
    const bool mc_ok = conditions_strict(mc["details"]["conditions"], mc_slack) &&
                       json_check(mc, "pair.realized_jumps_admissible")["pass"].get<bool>() &&
                       ladder["min_realized_margin_a"].get<double>() > 0.0 &&
                       ladder["min_realized_margin_b"].get<double>() > 0.0 &&
                       mc["details"]["paths"].get<int>() == mc_paths;
    const long long evaluated = mc["details"]["conditions"]["i"]["evaluated"].get<long long>() +
                                mc["details"]["conditions"]["ii"]["evaluated"].get<long long>() +
                                mc["details"]["conditions"]["iii"]["evaluated"].get<long long>();
    return {tree_ok && mc_ok,
            "pair strictness: realized jump margins > 0 (Monte Carlo min a " +
                fmt("%.3g", ladder["min_realized_margin_a"].get<double>()) + ", b " +
                fmt("%.3g", ladder["min_realized_margin_b"].get<double>()) +
                "); conditions strict, 0 violations, min slack tree " + fmt("%.3g", tree_slack) + ", Monte Carlo " +
                fmt("%.3g", mc_slack) + " over " + std::to_string(evaluated) + " evaluations on 1e5 paths"};
}

Outcome criterion_atom(const SuiteResult& tree, const json& mc) {
    const double t = check_of(tree.report, "atom_identity").residual;
    const double m = json_check(mc, "atom_identity")["residual"].get<double>();
    return {t <= exact_tol && m <= exact_tol,
            "one-step atom identity: residual tree " + fmt("%.3g", t) + ", Monte Carlo " + fmt("%.3g", m) +
                " (<= 1e-12)"};
}

Outcome criterion_enlargement(const SuiteResult& tree, const json& mc) {
    double tree_worst = 0.0;
    int tree_count = 0;
    for (const auto& c : tree.report.checks())
        if (c.name.rfind("enlargement.", 0) == 0) {
            ++tree_count;
            tree_worst = std::max(tree_worst, c.residual);
        }
    int within = 0, tested = 0;
    double worst_z = 0.0;
    std::string per;
    for (const auto& e : mc["details"]["enlargement"]) {
        ++tested;
        const double z = e["max_abs_z"].get<double>();
        worst_z = std::max(worst_z, z);
        if (e["functionals"].get<int>() >= min_functionals && z <= sigma_bound) ++within;
        per += " " + e["martingale"].get<std::string>() + " " + fmt("%.2f", z);
    }
    const bool ok = tree_count >= min_martingales && tree_worst <= tree_enlargement_tol && within >= min_martingales;
    return {ok, "enlargement: tree max conditional mean " + fmt("%.3g", tree_worst) + " (<= 1e-10) over " +
                    std::to_string(tree_count) + " martingales; Monte Carlo " + std::to_string(within) + "/" +
                    std::to_string(tested) + " martingales with all 21 functionals within 3 SE (max |z|:" + per + ")"};
}

Outcome criterion_regularity(const SuiteResult& reg) {
    const double jump = check_of(reg.report, "regularity.jump_identity").residual;
    const auto rows = csv_rows(file_of(reg, "regularity.csv"));
    int left_down = 0, right_down = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        left_down += std::stod(rows[i].at("left_residual")) < std::stod(rows[i - 1].at("left_residual"));
        right_down += std::stod(rows[i].at("right_residual")) < std::stod(rows[i - 1].at("right_residual"));
    }
    const auto fd = csv_rows(file_of(reg, "finite_difference.csv"));
    double min_order = INFINITY;
    for (std::size_t i = 1; i < fd.size(); ++i) {
        const double e0 = std::stod(fd[i - 1].at("mean_relative_error")), e1 = std::stod(fd[i].at("mean_relative_error"));
        const double h0 = std::stod(fd[i - 1].at("h")), h1 = std::stod(fd[i].at("h"));
        min_order = std::min(min_order, std::log(e0 / e1) / std::log(h0 / h1));
    }
    const int refinements = static_cast<int>(rows.size()) - 1;
    const bool ok = jump <= jump_identity_tol && refinements == 4 && left_down >= min_monotone &&
                    right_down >= min_monotone && fd.size() == 3 && min_order >= min_fd_order;
    return {ok, "regularity: jump identity " + fmt("%.3g", jump) + " (<= 1e-10); residuals decrease in " +
                    std::to_string(left_down) + "/4 (left) and " + std::to_string(right_down) +
                    "/4 (right) halvings (>= 3); finite-difference order >= " + fmt("%.2f", min_order) +
                    " over h = 1e-3, 1e-4, 1e-5 (>= 1.5)"};
}

Outcome criterion_continuity(const SuiteResult& reg, const SuiteResult& tree) {
    const auto rows = csv_rows(file_of(reg, "continuity.csv"));
    std::vector<double> cont, atom;
    for (const auto& r : rows) {
        if (r.at("case") == "continuous_A") cont.push_back(std::stod(r.at("mean_max_jump")));
        if (r.at("case") == "atom_at_t_star") atom.push_back(std::stod(r.at("jump_at_t_star")));
    }
    if (cont.size() < 3 || atom.size() < 3) throw std::runtime_error("continuity.csv is incomplete");
    const double factor = cont.front() / cont.back();
    const double drift = *std::max_element(atom.begin(), atom.end()) - *std::min_element(atom.begin(), atom.end());
    const double flat = check_of(tree.report, "zero_mass_where_A_flat").residual;
    const bool ok = factor >= continuity_factor && drift <= atom_stability && flat <= flat_mass_tol;
    return {ok, "continuity: delta = 0 path mean of the largest u-jump falls by " + fmt("%.2f", factor) +
                    " over 2 refinements (>= 2); jump at t* drifts " + fmt("%.3g", drift) +
                    " (<= 1e-6); tree mass on flat-A cells " + fmt("%.3g", flat) + " (<= 1e-12)"};
}

Outcome criterion_polarization(const fs::path& out) {
    RunConfig c = default_config();
    c.polarization.horizons = {5.0, 10.0, 20.0, 40.0};
    c.polarization.paths = polarization_paths;
    const auto t0 = std::chrono::steady_clock::now();
    const SuiteResult r = run_polarize(c);
    const double elapsed = seconds_since(t0);
    const auto written = write_outputs(r, c, out / "polarize");
    bool decreasing = true;
    std::string fractions;
    double prev = INFINITY;
    for (const auto& row : r.details["rows"]) {
        const double f = row["interior_fraction"].get<double>();
        decreasing = decreasing && f < prev;
        prev = f;
        fractions += " " + fmt("%.4g", f);
    }
    const bool ok = decreasing && r.details["rows"].size() == 4 && elapsed < polarization_seconds &&
                    fs::exists(out / "polarize" / "polarization.csv") && r.report.passed();
    return {ok, "polarization: interior fractions for T = 5, 10, 20, 40:" + fractions + " (strictly decreasing), " +
                    fmt("%.1f", elapsed) + " s (< 120 s), report in " + (out / "polarize").string()};
}

Outcome criterion_determinism(const fs::path& a, const fs::path& b) {
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    std::size_t other = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(b)) ++other;
    bool ok = !names.empty() && names.size() == other;
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    for (const auto& n : names) ok = ok && fs::exists(b / n) && slurp(a / n) == slurp(b / n);
    return {ok, "determinism: verify-mc with 1 and 3 threads, " + std::to_string(names.size()) +
                    " output files byte-identical"};
}

int run_cli(const std::string& threads, const fs::path& out) {
    const std::string cmd = "NATURAL_THREADS=" + threads + " '" + std::string(NATURAL_LAB_PATH) +
                            "' verify-mc --paths " + std::to_string(mc_paths) + " --out '" + out.string() +
                            "' > '" + out.string() + ".log' 2>&1";
    return std::system(cmd.c_str());
}

}  // namespace

int main() {
    const fs::path out = NATURAL_ACCEPT_DIR;
    fs::remove_all(out);
    fs::create_directories(out);

    std::vector<Outcome> results(10);
    auto guarded = [&](int n, const std::function<Outcome()>& f) {
        try {
            results[n] = f();
        } catch (const std::exception& e) {
            results[n] = {false, std::string("error: ") + e.what()};
        }
        std::printf("criterion %d: %s  %s\n", n, results[n].pass ? "PASS" : "FAIL", results[n].summary.c_str());
        std::fflush(stdout);
    };

    guarded(1, criterion_affine);

    RunConfig tc = default_config();
    tc.tree.branching = tree_branching;
    tc.tree.depth = tree_depth;
    SuiteResult tree;
    double tree_elapsed = 0.0;
    std::string tree_error;
    try {
        const auto t0 = std::chrono::steady_clock::now();
        tree = run_verify_tree(tc);
        tree_elapsed = seconds_since(t0);
    } catch (const std::exception& e) {
        tree_error = e.what();
    }
    auto need_tree = [&] {
        if (!tree_error.empty()) throw std::runtime_error("verify-tree: " + tree_error);
    };
    guarded(2, [&] {
        need_tree();
        return criterion_tree(tree, tree_elapsed);
    });

    const int first = run_cli("1", out / "mc_threads1");
    json mc;
    auto need_mc = [&] {
        if (first != 0) throw std::runtime_error("verify-mc exited with status " + std::to_string(first));
        if (mc.is_null()) {
            std::ifstream in(out / "mc_threads1" / "verify-mc.json");
            mc = json::parse(in);
        }
    };
    guarded(3, [&] {
        need_tree();
        need_mc();
        return criterion_strictness(tree, mc);
    });
    guarded(4, [&] {
        need_tree();
        need_mc();
        return criterion_atom(tree, mc);
    });
    guarded(5, [&] {
        need_tree();
        need_mc();
        return criterion_enlargement(tree, mc);
    });

    SuiteResult reg;
    std::string reg_error;
    try {
        reg = run_regularity(default_config());
    } catch (const std::exception& e) {
        reg_error = e.what();
    }
    auto need_reg = [&] {
        if (!reg_error.empty()) throw std::runtime_error("regularity: " + reg_error);
    };
    guarded(6, [&] {
        need_reg();
        return criterion_regularity(reg);
    });
    guarded(7, [&] {
        need_reg();
        need_tree();
        return criterion_continuity(reg, tree);
    });
    guarded(8, [&] { return criterion_polarization(out); });
    guarded(9, [&] {
        if (first != 0) throw std::runtime_error("first verify-mc run failed");
        if (run_cli("3", out / "mc_threads3") != 0) throw std::runtime_error("second verify-mc run failed");
        return criterion_determinism(out / "mc_threads1", out / "mc_threads3");
    });

    const bool all = std::all_of(results.begin() + 1, results.end(), [](const Outcome& o) { return o.pass; });
    std::printf("acceptance: %s\n", all ? "all criteria passed" : "some criteria failed");
    return all ? 0 : 1;
}
