#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qnet {

/// Least-squares line in (ln x, ln y).
struct PowerLawFit {
    double exponent = 0.0;
    double prefactor_log = 0.0;
    /// Mean squared residual in log space.
    double residual = 0.0;
    std::size_t n_points = 0;
    double exponent_stderr = 0.0;
};

/// Optional `weights` are per-point (e.g. inverse variances in log space).
[[nodiscard]] PowerLawFit fit_power_law(std::span<const double> xs, std::span<const double> ys,
                                        std::span<const double> weights = {});

struct CurvePoint {
    double rho;
    double value;
    double stderr_ = 0.0;
};
using Curve = std::vector<CurvePoint>;
/// Curves keyed by system size N.
using CurveSet = std::map<std::uint32_t, Curve>;

struct PairCrossing {
    std::uint32_t n_small;
    std::uint32_t n_large;
    double rho;
};

struct CrossingEstimate {
    double rho_c = 0.0;
    std::vector<PairCrossing> pairwise_crossings;
    double spread = 0.0;
};

/// Median of pairwise crossings of piecewise-linear curves. A pair with
/// several sign changes contributes the median of its own crossings.
[[nodiscard]] CrossingEstimate find_crossing(const CurveSet& curves);

/// Fits m ~ N^(-beta/nu); `exponent` of the result holds +beta/nu.
[[nodiscard]] PowerLawFit estimate_beta_over_nu(const std::map<std::uint32_t, double>& m_at_rc);

/// Window on the reduced distance (rho - rho_c) / rho_c.
struct ReducedWindow {
    double lo = 0.0;
    double hi = 1e300;
};

/// Fits m ~ (rho - rho_c)^beta over points inside `window` (lo exclusive).
[[nodiscard]] PowerLawFit estimate_order_exponent(std::span<const CurvePoint> m_curve, double rho_c,
                                                  ReducedWindow window = {});

enum class Binning { raw, logarithmic };

struct TauOptions {
    std::uint32_t min_size = 1;
    std::uint32_t max_size = 0xFFFFFFFFu;
    Binning binning = Binning::logarithmic;
    double bin_ratio = 2.0;
};

/// Fits n(s) ~ s^(-tau); `exponent` of the result holds +tau.
[[nodiscard]] PowerLawFit estimate_tau(const std::map<std::uint32_t, double>& n_s, const TauOptions& options = {});

enum class ScalingForm { order_parameter, susceptibility, cluster_size, s2_ratio };

[[nodiscard]] std::string to_string(ScalingForm form);
[[nodiscard]] ScalingForm parse_scaling_form(const std::string& name);
/// Exponent names a form needs: always "nu", plus one of
/// "beta_over_nu", "gamma_prime_over_nu", "one_over_sigma_nu".
[[nodiscard]] std::vector<std::string> exponent_names(ScalingForm form);

using Exponents = std::map<std::string, double>;

struct RescaledPoint {
    std::uint32_t n_nodes;
    double x;
    double y;
    double dy;
};

/// x = (rho - rho_c)/rho_c * N^(1/nu); y = value * N^(power) with power
/// +beta/nu, -gamma'/nu, -1/(sigma nu) or 0 depending on the form.
[[nodiscard]] std::vector<RescaledPoint> rescale(const CurveSet& curves, double rho_c, const Exponents& exponents,
                                                 ScalingForm form);

/// Leave-one-size-out collapse functional. Each rescaled point is compared
/// with the mean of the linear interpolants of every other size whose x
/// range covers it. With stderr on every point the squared deviation is
/// divided by the combined variance; otherwise by the mean square of the
/// compared y values. Returns the mean over compared points. Throws
/// std::domain_error when no point has overlapping support.
[[nodiscard]] double collapse_quality(const CurveSet& curves, double rho_c, const Exponents& exponents,
                                      ScalingForm form);

using ExponentBounds = std::map<std::string, std::pair<double, double>>;

struct LandscapeSample {
    Exponents exponents;
    double quality;
};

struct CollapseResult {
    Exponents exponents;
    double quality = 0.0;
    ScalingForm scaling_form = ScalingForm::s2_ratio;
    bool converged = false;
    double grid_quality = 0.0;
    /// Coarse-grid quality values, in grid order.
    std::vector<LandscapeSample> landscape;
};

struct CollapseOptions {
    std::size_t grid_steps = 21;
    std::size_t max_iterations = 400;
    double tolerance = 1e-10;
};

[[nodiscard]] CollapseResult optimize_collapse(const CurveSet& curves, double rho_c, ScalingForm form,
                                               const Exponents& initial, const ExponentBounds& bounds,
                                               const CollapseOptions& options = {});

/// Slope through the origin: sum(rho k) / sum(rho^2).
[[nodiscard]] double fit_mean_degree_coefficient(std::span<const std::pair<double, double>> rho_and_degree);

struct PathSample {
    double n_nodes;
    double rho;
    double avg_path;
};

struct PathScalingFit {
    double alpha = 0.0;
    double prefactor = 0.0;
    double residual = 0.0;
};

/// Fits ln(<l> rho) = alpha ln N + ln(prefactor).
[[nodiscard]] PathScalingFit fit_path_scaling(std::span<const PathSample> points);

struct PathGrowthTest {
    PathScalingFit power;
    /// Coefficients of <l> rho = a + c ln N.
    double log_intercept = 0.0;
    double log_slope = 0.0;
    /// Mean squared residual of ln(<l> rho) under each model.
    double power_residual = 0.0;
    double log_residual = 0.0;
    bool rejects_logarithmic = false;
};

/// Compares a power law in N against logarithmic growth (both two-parameter
/// fits). The logarithmic model is rejected when its log-space residual is
/// more than `rejection_ratio` times the power-law residual.
[[nodiscard]] PathGrowthTest discriminate_path_growth(std::span<const PathSample> points,
                                                      double rejection_ratio = 2.0);

}  // namespace qnet
