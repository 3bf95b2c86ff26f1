#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>

#include "qnet/criticality.hpp"

using namespace qnet;

namespace {

constexpr double kRhoC = 6.82e-5;
constexpr double kNu = 2.78;
constexpr double kBetaOverNu = 0.071;
constexpr double kGammaOverNu = 0.96;
constexpr double kSigmaNu = 0.94;

const std::vector<std::uint32_t> kSizes{1000, 2000, 4000, 8000, 16000};

/// Curves value(N, rho) = N^power * f((rho - rho_c)/rho_c * N^(1/nu)) on a
/// grid of reduced densities in [-0.2, 0.2].
CurveSet synthetic(double power, const std::function<double(double)>& f, double nu = kNu,
                   const std::vector<std::uint32_t>& sizes = kSizes)
{
    CurveSet out;
    for (auto n : sizes) {
        Curve c;
        for (int k = -20; k <= 20; ++k) {
            const double delta = 0.01 * k;
            const double x = delta * std::pow(static_cast<double>(n), 1.0 / nu);
            c.push_back({kRhoC * (1.0 + delta), std::pow(static_cast<double>(n), power) * f(x), 0.0});
        }
        out[n] = c;
    }
    return out;
}

double ratio_shape(double x) { return 0.05 + 0.45 * (1.0 - std::tanh(0.6 * x)); }
double peak_shape(double x) { return 0.2 + std::exp(-0.3 * x * x); }
double order_shape(double x) { return 0.1 + 1.0 / (1.0 + std::exp(-0.8 * x)); }

}  // namespace

TEST_CASE("power-law fits")
{
    const std::vector<double> xs{1, 2, 4, 8, 16, 32};
    std::vector<double> sq, root;
    for (double x : xs) {
        sq.push_back(x * x);
        root.push_back(3.0 * std::sqrt(x));
    }
    const auto a = fit_power_law(xs, sq);
    CHECK(a.exponent == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(a.residual < 1e-20);
    CHECK(a.n_points == 6);
    const auto b = fit_power_law(xs, root);
    CHECK(b.exponent == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(b.prefactor_log == doctest::Approx(std::log(3.0)).epsilon(1e-13));

    std::vector<double> scaled;
    for (double y : sq) scaled.push_back(7.5 * y);
    const auto c = fit_power_law(xs, scaled);
    CHECK(c.exponent == doctest::Approx(a.exponent).epsilon(1e-13));
    CHECK(c.prefactor_log == doctest::Approx(a.prefactor_log + std::log(7.5)).epsilon(1e-12));

    std::mt19937_64 rng(8);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<double> nx, ny;
    for (double x = 1.0; x < 1e4; x *= 1.3) {
        nx.push_back(x);
        ny.push_back(std::pow(x, 1.97) * (1.0 + noise(rng)));
    }
    CHECK(std::abs(fit_power_law(nx, ny).exponent - 1.97) < 0.05);

    CHECK_THROWS_AS((void)fit_power_law(std::vector<double>{1, 0}, std::vector<double>{1, 1}), std::domain_error);
    CHECK_THROWS_AS((void)fit_power_law(std::vector<double>{1, 2}, std::vector<double>{1, -1}), std::domain_error);
    CHECK_THROWS_AS((void)fit_power_law(std::vector<double>{1}, std::vector<double>{1}), std::invalid_argument);
}

TEST_CASE("weighted power-law fit ignores zero-weight outliers")
{
    const std::vector<double> xs{1, 2, 4, 8, 16};
    const std::vector<double> ys{1, 4, 16, 1000, 256};
    const std::vector<double> w{1, 1, 1, 0, 1};
    CHECK(fit_power_law(xs, ys, w).exponent == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("crossing examples")
{
    CurveSet lin;
    lin[1] = {{0.0, 0.0}, {1.0, 1.0}, {2.0, 2.0}};
    lin[2] = {{0.0, 2.0}, {1.0, 1.0}, {2.0, 0.0}};
    const auto c = find_crossing(lin);
    CHECK(c.rho_c == doctest::Approx(1.0));
    CHECK(c.pairwise_crossings.size() == 1);

    CurveSet three;
    three[10] = {{0.0, 0.1}, {0.5, 0.3}, {1.0, 0.5}};
    three[20] = {{0.0, 0.0}, {0.5, 0.3}, {1.0, 0.6}};
    three[40] = {{0.0, -0.1}, {0.5, 0.3}, {1.0, 0.7}};
    const auto t = find_crossing(three);
    CHECK(t.rho_c == doctest::Approx(0.5));
    CHECK(t.spread == doctest::Approx(0.0));
    CHECK(t.pairwise_crossings.size() == 3);

    CurveSet apart;
    apart[1] = {{0.0, 0.0}, {1.0, 1.0}};
    apart[2] = {{0.0, 2.0}, {1.0, 3.0}};
    CHECK_THROWS_AS((void)find_crossing(apart), std::domain_error);

    CurveSet single;
    single[1] = {{0.0, 0.0}, {1.0, 1.0}};
    CHECK_THROWS_AS((void)find_crossing(single), std::invalid_argument);
}

TEST_CASE("crossing of synthetic scaling curves is rho_c and lies within the pairwise range")
{
    const auto curves = synthetic(0.0, ratio_shape);
    const auto c = find_crossing(curves);
    CHECK(c.rho_c == doctest::Approx(kRhoC).epsilon(1e-9));
    double lo = 1e300, hi = -1e300;
    for (const auto& p : c.pairwise_crossings) {
        lo = std::min(lo, p.rho);
        hi = std::max(hi, p.rho);
    }
    CHECK(c.rho_c >= lo);
    CHECK(c.rho_c <= hi);
    CHECK(c.spread == doctest::Approx(hi - lo));
}

TEST_CASE("crossing under monotone transforms of the value axis")
{
    // Crossing on a grid node: any strictly increasing transform keeps it.
    CurveSet node;
    node[1] = {{0.0, 0.2}, {1.0, 0.5}, {2.0, 0.9}};
    node[2] = {{0.0, 0.1}, {1.0, 0.5}, {2.0, 1.2}};
    // Crossing between nodes: affine transforms keep it exactly, other
    // transforms keep the bracketing grid interval.
    CurveSet mid;
    mid[1] = {{0.0, 0.2}, {1.0, 0.4}, {2.0, 0.9}};
    mid[2] = {{0.0, 0.1}, {1.0, 0.3}, {2.0, 1.2}};
    const double mid_rho = find_crossing(mid).rho_c;
    REQUIRE(mid_rho > 1.0);
    REQUIRE(mid_rho < 2.0);
    const std::vector<std::function<double(double)>> transforms{
        [](double v) { return std::exp(v); }, [](double v) { return v * v * v; },
        [](double v) { return std::log(v); }, [](double v) { return 3.0 * v - 1.0; }};
    auto apply = [](const CurveSet& cs, const std::function<double(double)>& g) {
        CurveSet out = cs;
        for (auto& [n, c] : out)
            for (auto& p : c) p.value = g(p.value);
        return out;
    };
    for (const auto& g : transforms) {
        CHECK(find_crossing(apply(node, g)).rho_c == doctest::Approx(1.0).epsilon(1e-12));
        const double r = find_crossing(apply(mid, g)).rho_c;
        CHECK(r > 1.0);
        CHECK(r < 2.0);
    }
    CHECK(find_crossing(apply(mid, transforms[3])).rho_c == doctest::Approx(mid_rho).epsilon(1e-12));
}

TEST_CASE("beta/nu from m at rho_c")
{
    std::map<std::uint32_t, double> m;
    for (auto n : kSizes) m[n] = std::pow(static_cast<double>(n), -0.071);
    CHECK(estimate_beta_over_nu(m).exponent == doctest::Approx(0.071).epsilon(1e-12));
    for (auto& [n, v] : m) v = 4.2 * std::pow(static_cast<double>(n), -0.25);
    CHECK(estimate_beta_over_nu(m).exponent == doctest::Approx(0.25).epsilon(1e-12));
    CHECK_THROWS_AS((void)estimate_beta_over_nu({{1000, 0.5}, {2000, 0.4}}), std::invalid_argument);
}

TEST_CASE("beta/nu recovered from synthetic order-parameter curves")
{
    const auto curves = synthetic(-kBetaOverNu, order_shape);
    std::map<std::uint32_t, double> at;
    for (const auto& [n, c] : curves) at[n] = c[20].value;  // delta = 0
    CHECK(std::abs(estimate_beta_over_nu(at).exponent - kBetaOverNu) < 0.05);
}

TEST_CASE("order exponent beta")
{
    for (double beta : {0.2, 1.0}) {
        Curve c;
        for (int k = 1; k <= 12; ++k) {
            const double rho = kRhoC * (1.0 + 0.05 * k);
            c.push_back({rho, std::pow(rho - kRhoC, beta)});
        }
        c.insert(c.begin(), {kRhoC * 0.9, 0.01});
        CHECK(estimate_order_exponent(c, kRhoC).exponent == doctest::Approx(beta).epsilon(1e-10));
        const auto windowed = estimate_order_exponent(c, kRhoC, {0.0, 0.31});
        CHECK(windowed.n_points == 6);
    }
    Curve below{{kRhoC * 0.5, 0.1}, {kRhoC * 1.1, 0.2}};
    CHECK_THROWS_AS((void)estimate_order_exponent(below, kRhoC), std::domain_error);
}

TEST_CASE("tau from cluster-size distributions")
{
    std::map<std::uint32_t, double> ns197, ns2;
    for (std::uint32_t s = 1; s <= 10000; ++s) {
        ns197[s] = std::pow(s, -1.97);
        ns2[s] = std::pow(s, -2.0);
    }
    CHECK(estimate_tau(ns197, {1, 10000, Binning::raw}).exponent == doctest::Approx(1.97).epsilon(1e-10));
    const double log197 = estimate_tau(ns197, {1, 10000, Binning::logarithmic}).exponent;
    CHECK(std::abs(log197 - 1.97) < 0.05);
    const double log2 = estimate_tau(ns2, {1, 10000, Binning::logarithmic}).exponent;
    CHECK(std::abs(log2 - 2.0) < 0.02);
    CHECK(std::abs(log2 - estimate_tau(ns2, {1, 10000, Binning::raw}).exponent) < 0.05);
    CHECK_THROWS_AS((void)estimate_tau({{1, 0.5}, {2, 0.1}}, {}), std::domain_error);
}

TEST_CASE("collapse quality is zero for an exactly linear scaling function")
{
    const auto curves = synthetic(kGammaOverNu, [](double x) { return 10.0 + x; });
    const double q = collapse_quality(curves, kRhoC, {{"nu", kNu}, {"gamma_prime_over_nu", kGammaOverNu}},
                                      ScalingForm::susceptibility);
    CHECK(q < 1e-20);
}

TEST_CASE("collapse quality is minimal at the planted exponents")
{
    struct Case {
        ScalingForm form;
        std::string second;
        double value;
        double power;
        std::function<double(double)> shape;
    };
    const std::vector<Case> cases{
        {ScalingForm::susceptibility, "gamma_prime_over_nu", kGammaOverNu, kGammaOverNu, peak_shape},
        {ScalingForm::cluster_size, "one_over_sigma_nu", kSigmaNu, kSigmaNu, peak_shape},
        {ScalingForm::order_parameter, "beta_over_nu", kBetaOverNu, -kBetaOverNu, order_shape},
    };
    for (const auto& c : cases) {
        CAPTURE(to_string(c.form));
        const auto curves = synthetic(c.power, c.shape);
        const double best = collapse_quality(curves, kRhoC, {{"nu", kNu}, {c.second, c.value}}, c.form);
        for (double fn : {0.5, 0.75, 1.0, 1.25, 1.5, 2.0})
            for (double fs : {0.5, 0.75, 1.0, 1.25, 1.5, 2.0}) {
                if (fn == 1.0 && fs == 1.0) continue;
                const double q = collapse_quality(curves, kRhoC, {{"nu", kNu * fn}, {c.second, c.value * fs}}, c.form);
                CHECK(q > best);
            }
    }
    const auto ratio = synthetic(0.0, ratio_shape);
    const double best = collapse_quality(ratio, kRhoC, {{"nu", kNu}}, ScalingForm::s2_ratio);
    for (double fn : {0.5, 0.75, 1.25, 1.5, 2.0})
        CHECK(collapse_quality(ratio, kRhoC, {{"nu", kNu * fn}}, ScalingForm::s2_ratio) > best);
}

TEST_CASE("collapse optimization recovers planted exponents")
{
    SUBCASE("susceptibility")
    {
        const auto r = optimize_collapse(synthetic(kGammaOverNu, peak_shape), kRhoC, ScalingForm::susceptibility,
                                         {{"nu", 2.0}, {"gamma_prime_over_nu", 0.5}},
                                         {{"nu", {1.0, 6.0}}, {"gamma_prime_over_nu", {0.0, 2.0}}});
        CHECK(std::abs(r.exponents.at("nu") - kNu) < 0.05);
        CHECK(std::abs(r.exponents.at("gamma_prime_over_nu") - kGammaOverNu) < 0.05);
        CHECK(r.quality <= r.grid_quality);
        CHECK(r.landscape.size() == 21 * 21);
    }
    SUBCASE("cluster size")
    {
        const auto r = optimize_collapse(synthetic(kSigmaNu, peak_shape), kRhoC, ScalingForm::cluster_size,
                                         {{"nu", 2.0}, {"one_over_sigma_nu", 0.5}},
                                         {{"nu", {1.0, 6.0}}, {"one_over_sigma_nu", {0.0, 2.0}}});
        CHECK(std::abs(r.exponents.at("nu") - kNu) < 0.05);
        CHECK(std::abs(r.exponents.at("one_over_sigma_nu") - kSigmaNu) < 0.05);
    }
    SUBCASE("order parameter")
    {
        const auto r = optimize_collapse(synthetic(-kBetaOverNu, order_shape), kRhoC, ScalingForm::order_parameter,
                                         {{"nu", 2.0}, {"beta_over_nu", 0.2}},
                                         {{"nu", {1.0, 6.0}}, {"beta_over_nu", {0.0, 0.5}}});
        CHECK(std::abs(r.exponents.at("nu") - kNu) < 0.05);
        CHECK(std::abs(r.exponents.at("beta_over_nu") - kBetaOverNu) < 0.05);
    }
    SUBCASE("s2 ratio")
    {
        const auto r = optimize_collapse(synthetic(0.0, ratio_shape), kRhoC, ScalingForm::s2_ratio, {{"nu", 2.0}},
                                         {{"nu", {1.0, 6.0}}});
        CHECK(std::abs(r.exponents.at("nu") - kNu) < 0.05);
        CHECK(r.scaling_form == ScalingForm::s2_ratio);
    }
}

TEST_CASE("collapse optimization is deterministic and rejects degenerate input")
{
    const auto curves = synthetic(kGammaOverNu, peak_shape, kNu, {1000, 4000, 16000});
    const Exponents init{{"nu", 3.0}, {"gamma_prime_over_nu", 1.0}};
    const ExponentBounds bounds{{"nu", {1.0, 6.0}}, {"gamma_prime_over_nu", {0.0, 2.0}}};
    const auto a = optimize_collapse(curves, kRhoC, ScalingForm::susceptibility, init, bounds);
    const auto b = optimize_collapse(curves, kRhoC, ScalingForm::susceptibility, init, bounds);
    CHECK(a.exponents == b.exponents);
    CHECK(a.quality == b.quality);

    CurveSet one;
    one[1000] = curves.at(1000);
    CHECK_THROWS_AS((void)optimize_collapse(one, kRhoC, ScalingForm::susceptibility, init, bounds),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)optimize_collapse(curves, kRhoC, ScalingForm::susceptibility, {{"nu", 9.0}, {"gamma_prime_over_nu", 1.0}}, bounds),
                    std::invalid_argument);

    CurveSet disjoint;
    disjoint[1000] = {{1.0e-5, 1.0}, {1.1e-5, 2.0}};
    disjoint[2000] = {{9.0e-5, 1.0}, {9.1e-5, 2.0}};
    CHECK_THROWS_AS((void)collapse_quality(disjoint, 5e-5, {{"nu", 2.0}}, ScalingForm::s2_ratio), std::domain_error);
}

TEST_CASE("scaling form names")
{
    for (auto f : {ScalingForm::order_parameter, ScalingForm::susceptibility, ScalingForm::cluster_size,
                   ScalingForm::s2_ratio})
        CHECK(parse_scaling_form(to_string(f)) == f);
    CHECK(exponent_names(ScalingForm::s2_ratio) == std::vector<std::string>{"nu"});
    CHECK(exponent_names(ScalingForm::susceptibility) == std::vector<std::string>{"nu", "gamma_prime_over_nu"});
    CHECK_THROWS_AS((void)parse_scaling_form("nope"), std::invalid_argument);
}

TEST_CASE("mean degree coefficient")
{
    std::vector<std::pair<double, double>> pts;
    for (double rho : {2e-5, 5e-5, 8e-5, 1.2e-4}) pts.emplace_back(rho, 5.2e4 * rho);
    CHECK(fit_mean_degree_coefficient(pts) == doctest::Approx(5.2e4).epsilon(1e-12));
    const std::vector<std::pair<double, double>> one{{7e-5, 3.7}};
    CHECK(fit_mean_degree_coefficient(one) == doctest::Approx(3.7 / 7e-5).epsilon(1e-14));
}

TEST_CASE("path scaling and growth discrimination")
{
    std::vector<PathSample> power, logarithmic;
    for (double n = 1000; n <= 100000 * 1.0001; n *= std::sqrt(10.0))
        for (double rho : {8e-5, 1.2e-4, 2e-4}) {
            power.push_back({n, rho, 5e-5 * std::sqrt(n) / rho});
            logarithmic.push_back({n, rho, 1e-3 * std::log(n) / rho});
        }
    const auto fit = fit_path_scaling(power);
    CHECK(fit.alpha == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fit.prefactor == doctest::Approx(5e-5).epsilon(1e-10));
    CHECK(fit_path_scaling(logarithmic).alpha < 0.3);

    const auto t_power = discriminate_path_growth(power);
    CHECK(t_power.rejects_logarithmic);
    const auto t_log = discriminate_path_growth(logarithmic);
    CHECK_FALSE(t_log.rejects_logarithmic);
    CHECK(t_log.log_slope == doctest::Approx(1e-3).epsilon(1e-9));

    CHECK_THROWS_AS((void)fit_path_scaling(std::vector<PathSample>{{1000, 1e-4, 0.0}, {2000, 1e-4, 3.0}}),
                    std::domain_error);
}
