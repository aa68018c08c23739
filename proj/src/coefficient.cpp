#include "natural/coefficient.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "natural/errors.hpp"

namespace natural {

double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

double smooth_step_derivative(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    const double s = a + b;
    return a * b * (1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t))) / (s * s);
}

namespace {

constexpr int clamp_cells = 256;

double clamp_tail(double u) { return 1.0 - smooth_step(u); }

// The table lives in the scaled coordinate s = (|x| - 1) / width, so every width shares it.
std::shared_ptr<const std::vector<double>> clamp_areas() {
    static const auto table = [] {
        using boost::math::quadrature::gauss_kronrod;
        auto areas = std::make_shared<std::vector<double>>(clamp_cells + 1, 0.0);
        for (int j = 1; j <= clamp_cells; ++j)
            (*areas)[j] = (*areas)[j - 1] + gauss_kronrod<double, 31>::integrate(
                                                clamp_tail, double(j - 1) / clamp_cells, double(j) / clamp_cells, 10, 1e-15);
        return std::shared_ptr<const std::vector<double>>(std::move(areas));
    }();
    return table;
}


// sup_x |g(t, x)^T z| from the grid values gz, refined by Brent's method on the two cells around
// every grid point that beats a neighbour, so the result does not hinge on the grid resolution.
// Points on a flat run (equal to both neighbours) are already exact.
double refined_sup_abs(const CoefficientSpec& spec, double t, std::span<const double> z,
                       const std::vector<double>& gz) {
    const auto& grid = spec.xgrid();
    auto neg_abs = [&](double x) {
        double v = 0.0;
        for (int j = 0; j < spec.dimension(); ++j) v += spec.g(j, t, x) * z[j];
        return -std::abs(v);
    };
    double sup = 0.0;
    const std::size_t n = gz.size();
    for (std::size_t r = 0; r < n; ++r) {
        const double v = std::abs(gz[r]);
        sup = std::max(sup, v);
        if (v == 0.0) continue;
        const double left = r > 0 ? std::abs(gz[r - 1]) : 0.0;
        const double right = r + 1 < n ? std::abs(gz[r + 1]) : 0.0;
        if (v < left || v < right || (v == left && v == right)) continue;
        const double lo = grid[r > 0 ? r - 1 : r], hi = grid[r + 1 < n ? r + 1 : r];
        if (hi > lo) sup = std::max(sup, -boost::math::tools::brent_find_minima(neg_abs, lo, hi, 52).second);
    }
    return sup;
}

}  // namespace

Clamp::Clamp(double width) : width_(width) {
    if (!(width > 0.0 && width <= 2.0)) throw ConfigError("pair.phi_width: must lie in (0, 2] so that |phi| <= 2");
    areas_ = clamp_areas();
}

double Clamp::operator()(double x) const {
    const double ax = std::abs(x);
    if (ax <= 1.0) return x;
    const double s = (ax - 1.0) / width_;
    double mag;
    if (s >= 1.0) {
        mag = bound();
    } else {
        const int j = static_cast<int>(s * clamp_cells);
        const double from = double(j) / clamp_cells;
        const double area = (*areas_)[j] + boost::math::quadrature::gauss<double, 20>::integrate(clamp_tail, from, s);
        mag = 1.0 + width_ * area;
    }
    return x < 0.0 ? -mag : mag;
}

double Clamp::derivative(double x) const {
    const double ax = std::abs(x);
    if (ax <= 1.0) return 1.0;
    return 1.0 - smooth_step((ax - 1.0) / width_);
}

double Bump::time_factor(double t) const { return 1.0 + amplitude * std::sin(frequency * t); }

double Bump::value(double t, double x) const {
    if (x <= lower() || x >= upper()) return 0.0;
    return height * time_factor(t) * smooth_step((x - lower()) / width) * smooth_step((upper() - x) / width);
}

double Bump::derivative(double t, double x) const {
    if (x <= lower() || x >= upper()) return 0.0;
    const double l = (x - lower()) / width;
    const double r = (upper() - x) / width;
    return height * time_factor(t) *
           (smooth_step_derivative(l) * smooth_step(r) - smooth_step(l) * smooth_step_derivative(r)) / width;
}

CoefficientSpec::CoefficientSpec(std::vector<Bump> bumps, Clamp phi, int resolution)
    : bumps_(std::move(bumps)), phi_(phi), resolution_(resolution) {
    if (resolution < 16) throw ConfigError("pair.xgrid_resolution: need at least 16 points");
    for (std::size_t j = 0; j < bumps_.size(); ++j) {
        const Bump& b = bumps_[j];
        const std::string where = "pair.bumps[" + std::to_string(j) + "]";
        if (!(b.width > 0.0) || !std::isfinite(b.width)) throw ConfigError(where + ".width: must be positive");
        if (!(b.plateau >= 0.0) || !std::isfinite(b.plateau)) throw ConfigError(where + ".plateau: must be non-negative");
        if (!std::isfinite(b.center) || !std::isfinite(b.height)) throw ConfigError(where + ": center/height must be finite");
        if (!(std::abs(b.amplitude) < 1.0)) throw ConfigError(where + ".amplitude: must lie in (-1, 1)");
    }
    if (bumps_.empty()) return;
    double lo = bumps_[0].lower(), hi = bumps_[0].upper();
    for (const Bump& b : bumps_) {
        lo = std::min(lo, b.lower());
        hi = std::max(hi, b.upper());
    }
    xgrid_.resize(resolution_);
    for (int i = 0; i < resolution_; ++i) xgrid_[i] = lo + (hi - lo) * i / (resolution_ - 1);
}

bool CoefficientSpec::autonomous() const {
    return std::all_of(bumps_.begin(), bumps_.end(), [](const Bump& b) { return b.amplitude == 0.0 || b.frequency == 0.0; });
}

bool CoefficientSpec::is_zero() const {
    return std::all_of(bumps_.begin(), bumps_.end(), [](const Bump& b) { return b.height == 0.0; });
}

double CoefficientSpec::sup_abs_g() const {
    double s = 0.0;
    for (const Bump& b : bumps_) s = std::max(s, std::abs(b.height) * (1.0 + std::abs(b.amplitude)));
    return s;
}

double CoefficientSpec::sup_abs_g_derivative() const {
    double s = 0.0;
    for (const Bump& b : bumps_)
        s = std::max(s, std::abs(b.height) * (1.0 + std::abs(b.amplitude)) * smooth_step_slope / b.width);
    return s;
}

double CoefficientSpec::lipschitz_bound() const {
    const double c = phi_.bound();
    return 2.0 * c * sup_abs_g() + c * c * sup_abs_g_derivative();
}

void evaluate_f(const CoefficientSpec& spec, double t, double x, double pred, std::span<double> out) {
    const double w = spec.phi()(pred - x) * spec.phi()(x);
    for (int j = 0; j < spec.dimension(); ++j) out[j] = w * spec.g(j, t, x);
}

void evaluate_df(const CoefficientSpec& spec, double t, double x, double pred, std::span<double> out) {
    const Clamp& phi = spec.phi();
    const double a = phi(pred - x), b = phi(x);
    const double c = -phi.derivative(pred - x) * b + a * phi.derivative(x);
    for (int j = 0; j < spec.dimension(); ++j) out[j] = c * spec.g(j, t, x) + a * b * spec.g_derivative(j, t, x);
}

double f_dot(const CoefficientSpec& spec, double t, double x, double pred, std::span<const double> z) {
    double gz = 0.0;
    for (int j = 0; j < spec.dimension(); ++j) gz += spec.g(j, t, x) * z[j];
    if (gz == 0.0) return 0.0;
    return spec.phi()(pred - x) * spec.phi()(x) * gz;
}

double df_dot(const CoefficientSpec& spec, double t, double x, double pred, std::span<const double> z) {
    double gz = 0.0, dgz = 0.0;
    for (int j = 0; j < spec.dimension(); ++j) {
        gz += spec.g(j, t, x) * z[j];
        dgz += spec.g_derivative(j, t, x) * z[j];
    }
    if (gz == 0.0 && dgz == 0.0) return 0.0;
    const Clamp& phi = spec.phi();
    const double a = phi(pred - x), b = phi(x);
    return (-phi.derivative(pred - x) * b + a * phi.derivative(x)) * gz + a * b * dgz;
}

double xg_dot(const CoefficientSpec& spec, double t, double x, std::span<const double> z) {
    double gz = 0.0;
    for (int j = 0; j < spec.dimension(); ++j) gz += spec.g(j, t, x) * z[j];
    return x * gz;
}

Margins jump_set_margin(const CoefficientSpec& spec, double t, double dm, std::span<const double> z, double pred) {
    // Off the support every term vanishes, so 0 enters both the sup and the inf.
    double inf = 0.0;
    std::vector<double> gz(spec.xgrid().size(), 0.0);
    for (std::size_t r = 0; r < gz.size(); ++r) {
        const double x = spec.xgrid()[r];
        for (int j = 0; j < spec.dimension(); ++j) gz[r] += spec.g(j, t, x) * z[j];
        inf = std::min(inf, df_dot(spec, t, x, pred, z));
    }
    return {1.0 + dm - 2.0 * refined_sup_abs(spec, t, z, gz), inf + 1.0 + dm};
}

MarginTable::MarginTable(const CoefficientSpec& spec, double t, std::vector<std::vector<double>> directions)
    : spec_(&spec), t_(t), directions_(std::move(directions)) {
    const int m = spec.dimension();
    const auto& grid = spec.xgrid();
    std::vector<double> g(grid.size() * m), dg(grid.size() * m);
    for (std::size_t r = 0; r < grid.size(); ++r)
        for (int j = 0; j < m; ++j) {
            g[r * m + j] = spec.g(j, t, grid[r]);
            dg[r * m + j] = spec.g_derivative(j, t, grid[r]);
        }
    for (double x : grid)
        if (x < 0.0 || x > 1.0) outside_.push_back(x);

    for (const auto& z : directions_) {
        std::vector<Line> lines;
        std::vector<double> gzs(grid.size());
        for (std::size_t r = 0; r < grid.size(); ++r) {
            const double x = grid[r];
            double gz = 0.0, dgz = 0.0;
            for (int j = 0; j < m; ++j) {
                gz += g[r * m + j] * z[j];
                dgz += dg[r * m + j] * z[j];
            }
            gzs[r] = gz;
            if (x >= 0.0 && x <= 1.0) lines.push_back({gz + x * dgz, -(2.0 * x * gz + x * x * dgz)});
        }
        sup_abs_.push_back(2.0 * refined_sup_abs(spec, t, z, gzs));

        // Lower envelope of P -> slope P + intercept: sort by slope descending, keep the lowest
        // intercept among equal slopes, then drop lines that are never minimal.
        std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
            return a.slope != b.slope ? a.slope > b.slope : a.intercept < b.intercept;
        });
        std::vector<Line> hull;
        auto cross = [](const Line& a, const Line& b) { return (b.intercept - a.intercept) / (a.slope - b.slope); };
        for (const Line& l : lines) {
            if (!hull.empty() && hull.back().slope == l.slope) continue;
            while (hull.size() >= 2 && cross(hull[hull.size() - 2], l) <= cross(hull[hull.size() - 2], hull.back()))
                hull.pop_back();
            hull.push_back(l);
        }
        std::vector<double> breaks;
        for (std::size_t r = 0; r + 1 < hull.size(); ++r) breaks.push_back(cross(hull[r], hull[r + 1]));
        hull_.push_back(std::move(hull));
        breaks_.push_back(std::move(breaks));
    }
}

double MarginTable::inf_slope(int i, double pred) const {
    double inf = 0.0;
    const auto& hull = hull_[i];
    if (!hull.empty()) {
        const auto& br = breaks_[i];
        const std::size_t r = std::lower_bound(br.begin(), br.end(), pred) - br.begin();
        // Evaluate the neighbours too so rounding in the breakpoints cannot pick a non-minimal line.
        for (std::size_t q = (r == 0 ? 0 : r - 1); q <= std::min(r + 1, hull.size() - 1); ++q)
            inf = std::min(inf, hull[q].slope * pred + hull[q].intercept);
    }
    for (double x : outside_) inf = std::min(inf, df_dot(*spec_, t_, x, pred, directions_[i]));
    return inf;
}

Margins MarginTable::margins(int i, double dm, double pred, double rho) const {
    return {1.0 + dm - rho * sup_abs_[i], 1.0 + dm + rho * inf_slope(i, pred)};
}

}  // namespace natural
