#pragma once

#include <memory>
#include <span>
#include <vector>

namespace natural {

/// C-infinity step: 0 for t <= 0, 1 for t >= 1, S(t) + S(1 - t) = 1.
double smooth_step(double t);
double smooth_step_derivative(double t);
/// sup |S'| (attained at t = 1/2).
inline constexpr double smooth_step_slope = 2.0;

/// Odd increasing clamp: identity on [-1, 1], then flattens smoothly over a transition of
/// the given width to the constant 1 + width / 2.  phi(x) = x on [0, 1], |phi| <= 2 when
/// width <= 2, |phi(x) / x| <= 1.
class Clamp {
  public:
    explicit Clamp(double width = 1.0);

    double operator()(double x) const;
    double derivative(double x) const;
    double width() const { return width_; }
    double bound() const { return 1.0 + width_ / 2.0; }

  private:
    double width_;
    // Area of 1 - smooth_step on [0, j / cells], so evaluation only integrates one short cell.
    std::shared_ptr<const std::vector<double>> areas_;
};

/// Smooth plateau bump: height on [center - plateau, center + plateau], zero outside
/// (center - plateau - width, center + plateau + width); optional time modulation
/// 1 + amplitude sin(frequency t).
struct Bump {
    double center = 0.5;
    double plateau = 0.0;
    double width = 0.25;
    double height = 1.0;
    double amplitude = 0.0;
    double frequency = 0.0;

    double lower() const { return center - plateau - width; }
    double upper() const { return center + plateau + width; }
    double time_factor(double t) const;
    double value(double t, double x) const;
    double derivative(double t, double x) const;  // d/dx
};

/// g = (bump_1, ..., bump_m) with the clamp phi and the x-grid used for sup/inf over x.
class CoefficientSpec {
  public:
    CoefficientSpec() = default;
    CoefficientSpec(std::vector<Bump> bumps, Clamp phi = Clamp(), int xgrid_resolution = 2048);

    int dimension() const { return static_cast<int>(bumps_.size()); }
    const std::vector<Bump>& bumps() const { return bumps_; }
    const Clamp& phi() const { return phi_; }
    bool autonomous() const;
    bool is_zero() const;
    int xgrid_resolution() const { return resolution_; }
    /// Uniform points over the union hull of the supports, plus the off-support point 0 when g vanishes there.
    const std::vector<double>& xgrid() const { return xgrid_; }

    double g(int j, double t, double x) const { return bumps_[j].value(t, x); }
    double g_derivative(int j, double t, double x) const { return bumps_[j].derivative(t, x); }
    double sup_abs_g() const;
    double sup_abs_g_derivative() const;
    /// Global Lipschitz constant of x -> f(t, x; P), valid for every t and P.
    double lipschitz_bound() const;

  private:
    std::vector<Bump> bumps_;
    Clamp phi_;
    int resolution_ = 2048;
    std::vector<double> xgrid_;
};

/// f(t, x; P) = phi(P - x) phi(x) g(t, x), written into out (size m).
void evaluate_f(const CoefficientSpec& spec, double t, double x, double pred, std::span<double> out);
/// d f / d x.
void evaluate_df(const CoefficientSpec& spec, double t, double x, double pred, std::span<double> out);
/// f^T z and (df/dx)^T z without allocation.
double f_dot(const CoefficientSpec& spec, double t, double x, double pred, std::span<const double> z);
double df_dot(const CoefficientSpec& spec, double t, double x, double pred, std::span<const double> z);
/// x g(t, x)^T z.
double xg_dot(const CoefficientSpec& spec, double t, double x, std::span<const double> z);

struct Margins {
    double a = 0.0;  // (1 + dm) - sup_x 2 |g^T z|
    double b = 0.0;  // inf_x (df/dx)^T z + (1 + dm)
    bool admissible() const { return a > 0.0 && b > 0.0; }
};

/// Direct scan of both admissibility conditions over the coefficient's x-grid; the sup in `a` is refined
/// between grid points, the inf in `b` is the grid minimum.
Margins jump_set_margin(const CoefficientSpec& spec, double t, double dm, std::span<const double> z, double pred);

/// Per-step precomputation of the two scans for a fixed set of jump directions z_i.
///
/// sup_x 2 |g^T z_i| does not depend on P.  For grid points in [0, 1] both phi factors are the
/// identity (P in [0, 1]), so (df/dx)^T z = P alpha(x) - beta(x) is a line in P and the infimum
/// over those points is a concave lower envelope queried in O(log n).  The remaining grid points
/// are scanned directly.
class MarginTable {
  public:
    MarginTable(const CoefficientSpec& spec, double t, std::vector<std::vector<double>> directions);

    int directions() const { return static_cast<int>(directions_.size()); }
    /// sup_x 2 |g(t, x)^T z_i|.
    double sup_abs(int i) const { return sup_abs_[i]; }
    /// inf_x (df/dx)(t, x; P)^T z_i, including the off-support value 0.
    double inf_slope(int i, double pred) const;
    Margins margins(int i, double dm, double pred, double rho) const;

  private:
    struct Line {
        double slope;
        double intercept;
    };

    const CoefficientSpec* spec_;
    double t_;
    std::vector<std::vector<double>> directions_;
    std::vector<double> sup_abs_;
    std::vector<std::vector<Line>> hull_;          // per direction, lower envelope sorted by slope (descending)
    std::vector<std::vector<double>> breaks_;      // P-coordinates where the minimizing line changes
    std::vector<double> outside_;                  // grid points outside [0, 1]
};

}  // namespace natural
