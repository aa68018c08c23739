#include "natural/calculus.hpp"

#include <cmath>
#include <string>

#include "natural/errors.hpp"

namespace natural {
namespace {

void require_same_shape(const Process& a, const Process& b, const char* what) {
    if (!a.same_shape(b)) throw ConfigError(std::string(what) + ": processes live on different grids");
}

}  // namespace

Process stochastic_integral(const Process& h, const Process& x) {
    require_same_shape(h, x, "stochastic_integral");
    Process out(x.paths(), x.steps(), 0.0);
    for (int p = 0; p < x.paths(); ++p)
        for (int k = 1; k <= x.steps(); ++k) out(p, k) = out(p, k - 1) + h(p, k) * x.increment(p, k);
    if (x.has_branches()) {
        const BranchTable& src = x.branches();
        BranchTable table(x.paths(), x.steps(), src.branches());
        for (int p = 0; p < x.paths(); ++p)
            for (int k = 1; k <= x.steps(); ++k)
                for (int i = 0; i < src.branches(); ++i) table(p, k, i) = h(p, k) * src(p, k, i);
        out.set_branches(std::move(table));
    }
    return out;
}

Process doleans_exponential(const Process& w, int from_index) {
    if (from_index < 0 || from_index > w.steps()) throw ConfigError("doleans_exponential: start index off the grid");
    Process out(w.paths(), w.steps(), 1.0);
    for (int p = 0; p < w.paths(); ++p)
        for (int k = from_index + 1; k <= w.steps(); ++k) out(p, k) = out(p, k - 1) * (1.0 + w.increment(p, k));
    if (w.has_branches()) {
        const BranchTable& src = w.branches();
        BranchTable table(w.paths(), w.steps(), src.branches());
        for (int p = 0; p < w.paths(); ++p)
            for (int k = from_index + 1; k <= w.steps(); ++k)
                for (int i = 0; i < src.branches(); ++i) table(p, k, i) = out(p, k - 1) * src(p, k, i);
        out.set_branches(std::move(table));
    }
    return out;
}

Process affine_solve(int u, std::span<const double> a, const Process& w, const Process& v) {
    require_same_shape(w, v, "affine_solve");
    if (static_cast<int>(a.size()) != w.paths()) throw ConfigError("affine_solve: one initial value per path required");
    if (u < 0 || u > w.steps()) throw ConfigError("affine_solve: start index off the grid");
    Process out(w.paths(), w.steps());
    for (int p = 0; p < w.paths(); ++p) {
        for (int k = 0; k <= u; ++k) out(p, k) = a[p];
        double e = 1.0;    // E_{k-1}
        double acc = a[p];  // a + sum dV_j / E_{j-1}
        for (int k = u + 1; k <= w.steps(); ++k) {
            const double dw = w.increment(p, k);
            if (!(dw > -1.0))
                throw DomainError("affine_solve: increment of W is " + std::to_string(dw) + " <= -1 at step " +
                                  std::to_string(k));
            acc += v.increment(p, k) / e;
            e *= 1.0 + dw;
            out(p, k) = e * acc;
        }
    }
    return out;
}

Process affine_solve(int u, double a, const Process& w, const Process& v) {
    const std::vector<double> starts(w.paths(), a);
    return affine_solve(u, starts, w, v);
}

Process affine_recursion(int u, std::span<const double> a, const Process& w, const Process& v) {
    require_same_shape(w, v, "affine_recursion");
    if (static_cast<int>(a.size()) != w.paths()) throw ConfigError("affine_recursion: one initial value per path required");
    if (u < 0 || u > w.steps()) throw ConfigError("affine_recursion: start index off the grid");
    Process out(w.paths(), w.steps());
    for (int p = 0; p < w.paths(); ++p) {
        for (int k = 0; k <= u; ++k) out(p, k) = a[p];
        for (int k = u + 1; k <= w.steps(); ++k) {
            const double dv = v.increment(p, k);
            const double prev = out(p, k - 1);
            out(p, k) = prev + (prev + dv) * w.increment(p, k) + dv;
        }
    }
    return out;
}

double bracket_increment(const PathBundle& bundle, const Process& x, const Process& y, int p, int k) {
    const auto tx = x.branches().at(p, k);
    const auto ty = y.branches().at(p, k);
    const auto& prob = bundle.law().probabilities();
    double s = 0.0;
    for (std::size_t i = 0; i < prob.size(); ++i) s += prob[i] * tx[i] * ty[i];
    return s;
}

Process predictable_bracket(const PathBundle& bundle, const Process& x, const Process& y) {
    require_same_shape(x, y, "predictable_bracket");
    if (x.paths() != bundle.paths() || x.steps() != bundle.steps())
        throw ConfigError("predictable_bracket: processes do not match the path bundle");
    if (!x.has_branches() || !y.has_branches())
        throw UnsupportedProcess("predictable_bracket: process is not expressed in the step law's drivers");
    if (x.branches().branches() != bundle.branches() || y.branches().branches() != bundle.branches())
        throw UnsupportedProcess("predictable_bracket: branch table does not match the step law");
    // The table must reproduce the realized increment, otherwise it describes some other process.
    for (const Process* z : {&x, &y}) {
        for (int p = 0; p < bundle.paths(); ++p)
            for (int k = 1; k <= bundle.steps(); ++k) {
                const double realized = z->increment(p, k);
                const double tabled = z->branches()(p, k, bundle.branch(p, k));
                if (std::abs(realized - tabled) > 1e-9 * (1.0 + std::abs(realized)))
                    throw UnsupportedProcess("predictable_bracket: branch table inconsistent with realized increments");
            }
    }
    Process out(x.paths(), x.steps(), 0.0);
    for (int p = 0; p < x.paths(); ++p)
        for (int k = 1; k <= x.steps(); ++k) out(p, k) = out(p, k - 1) + bracket_increment(bundle, x, y, p, k);
    return out;
}

}  // namespace natural
