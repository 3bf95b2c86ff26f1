#include "qnet/criticality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct LineFit {
    double slope;
    double intercept;
    double residual;
    double slope_stderr;
};

LineFit fit_line(std::span<const double> xs, std::span<const double> ys, std::span<const double> weights)
{
    const std::size_t n = xs.size();
    double sw = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double w = weights.empty() ? 1.0 : weights[k];
        sw += w;
        sx += w * xs[k];
        sy += w * ys[k];
    }
    const double mx = sx / sw;
    const double my = sy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double w = weights.empty() ? 1.0 : weights[k];
        sxx += w * (xs[k] - mx) * (xs[k] - mx);
        sxy += w * (xs[k] - mx) * (ys[k] - my);
    }
    if (!(sxx > 0.0)) throw std::domain_error("fit: abscissae are all equal");
    LineFit f{};
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0.0, wss = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double w = weights.empty() ? 1.0 : weights[k];
        const double r = ys[k] - (f.intercept + f.slope * xs[k]);
        ss += r * r;
        wss += w * r * r;
    }
    f.residual = ss / static_cast<double>(n);
    f.slope_stderr = n > 2 ? std::sqrt(wss / static_cast<double>(n - 2) / sxx * (sw / static_cast<double>(n))) : 0.0;
    return f;
}

double interpolate(const Curve& c, double rho)
{
    auto hi = std::lower_bound(c.begin(), c.end(), rho, [](const CurvePoint& p, double r) { return p.rho < r; });
    if (hi == c.end()) return c.back().value;
    if (hi->rho == rho || hi == c.begin()) return hi->value;
    auto lo = hi - 1;
    const double t = (rho - lo->rho) / (hi->rho - lo->rho);
    return lo->value + t * (hi->value - lo->value);
}

std::vector<double> pair_crossings(const Curve& a, const Curve& b)
{
    const double lo = std::max(a.front().rho, b.front().rho);
    const double hi = std::min(a.back().rho, b.back().rho);
    std::vector<double> xs;
    for (const Curve* c : {&a, &b})
        for (const auto& p : *c)
            if (p.rho >= lo && p.rho <= hi) xs.push_back(p.rho);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    std::vector<double> out;
    if (xs.size() < 2) return out;
    std::vector<double> diff(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) diff[k] = interpolate(a, xs[k]) - interpolate(b, xs[k]);
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (diff[k] == 0.0) {
            // Count a touching run once, at its first point.
            if (k == 0 || diff[k - 1] != 0.0) out.push_back(xs[k]);
            continue;
        }
        if (k + 1 < xs.size() && diff[k + 1] != 0.0 && (diff[k] < 0.0) != (diff[k + 1] < 0.0))
            out.push_back(xs[k] + diff[k] * (xs[k + 1] - xs[k]) / (diff[k] - diff[k + 1]));
    }
    return out;
}

Curve sorted_curve(const Curve& c)
{
    Curve out = c;
    std::sort(out.begin(), out.end(), [](const CurvePoint& x, const CurvePoint& y) { return x.rho < y.rho; });
    return out;
}

}  // namespace

PowerLawFit fit_power_law(std::span<const double> xs, std::span<const double> ys, std::span<const double> weights)
{
    if (xs.size() != ys.size()) throw std::invalid_argument("fit_power_law: xs and ys differ in length");
    if (!weights.empty() && weights.size() != xs.size())
        throw std::invalid_argument("fit_power_law: weights differ in length");
    if (xs.size() < 2) throw std::invalid_argument("fit_power_law: needs at least 2 points");
    std::vector<double> lx(xs.size()), ly(ys.size());
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (!(xs[k] > 0.0) || !(ys[k] > 0.0)) throw std::domain_error("fit_power_law: values must be strictly positive");
        lx[k] = std::log(xs[k]);
        ly[k] = std::log(ys[k]);
    }
    const LineFit f = fit_line(lx, ly, weights);
    return {f.slope, f.intercept, f.residual, xs.size(), f.slope_stderr};
}

CrossingEstimate find_crossing(const CurveSet& curves)
{
    if (curves.size() < 2) throw std::invalid_argument("find_crossing: needs at least 2 sizes");
    std::vector<std::pair<std::uint32_t, Curve>> sorted;
    for (const auto& [n, c] : curves) {
        if (c.size() < 2) throw std::invalid_argument("find_crossing: curve for N=" + std::to_string(n) + " has < 2 points");
        sorted.emplace_back(n, sorted_curve(c));
    }
    CrossingEstimate est;
    std::vector<double> all;
    for (std::size_t a = 0; a < sorted.size(); ++a) {
        for (std::size_t b = a + 1; b < sorted.size(); ++b) {
            const auto xs = pair_crossings(sorted[a].second, sorted[b].second);
            if (xs.empty())
                throw std::domain_error("find_crossing: curves N=" + std::to_string(sorted[a].first) + " and N=" +
                                        std::to_string(sorted[b].first) + " do not cross in the sampled range");
            const double x = median(xs);
            est.pairwise_crossings.push_back({sorted[a].first, sorted[b].first, x});
            all.push_back(x);
        }
    }
    est.rho_c = median(all);
    const auto [mn, mx] = std::minmax_element(all.begin(), all.end());
    est.spread = *mx - *mn;
    return est;
}

PowerLawFit estimate_beta_over_nu(const std::map<std::uint32_t, double>& m_at_rc)
{
    if (m_at_rc.size() < 3) throw std::invalid_argument("estimate_beta_over_nu: needs at least 3 sizes");
    std::vector<double> xs, ys;
    for (const auto& [n, m] : m_at_rc) {
        xs.push_back(n);
        ys.push_back(m);
    }
    PowerLawFit f = fit_power_law(xs, ys);
    f.exponent = -f.exponent;
    return f;
}

PowerLawFit estimate_order_exponent(std::span<const CurvePoint> m_curve, double rho_c, ReducedWindow window)
{
    if (!(rho_c > 0.0)) throw std::domain_error("estimate_order_exponent: rho_c must be positive");
    std::vector<double> xs, ys;
    for (const auto& p : m_curve) {
        const double reduced = (p.rho - rho_c) / rho_c;
        if (reduced > window.lo && reduced <= window.hi && p.value > 0.0) {
            xs.push_back(p.rho - rho_c);
            ys.push_back(p.value);
        }
    }
    if (xs.size() < 2) throw std::domain_error("estimate_order_exponent: fewer than 2 points above rho_c in window");
    return fit_power_law(xs, ys);
}

PowerLawFit estimate_tau(const std::map<std::uint32_t, double>& n_s, const TauOptions& options)
{
    std::vector<double> xs, ys;
    std::uint32_t top = 0;
    for (const auto& [s, n] : n_s)
        if (n > 0.0 && s >= options.min_size && s <= options.max_size) top = s;

    if (options.binning == Binning::raw) {
        for (const auto& [s, n] : n_s)
            if (n > 0.0 && s >= options.min_size && s <= options.max_size) {
                xs.push_back(s);
                ys.push_back(n);
            }
    } else {
        if (!(options.bin_ratio > 1.0)) throw std::invalid_argument("estimate_tau: bin_ratio must exceed 1");
        double lo = std::max<std::uint32_t>(options.min_size, 1);
        while (top > 0 && lo <= top) {
            const double next = std::max(lo + 1.0, std::ceil(lo * options.bin_ratio));
            const double hi = std::min(next - 1.0, static_cast<double>(top));
            double sum = 0.0;
            for (auto it = n_s.lower_bound(static_cast<std::uint32_t>(lo));
                 it != n_s.end() && it->first <= static_cast<std::uint32_t>(hi); ++it)
                sum += it->second;
            if (sum > 0.0) {
                xs.push_back(std::sqrt(lo * hi));
                ys.push_back(sum / (hi - lo + 1.0));
            }
            lo = next;
        }
    }
    if (xs.size() < 3) throw std::domain_error("estimate_tau: fewer than 3 occupied sizes/bins in range");
    PowerLawFit f = fit_power_law(xs, ys);
    f.exponent = -f.exponent;
    return f;
}

std::string to_string(ScalingForm form)
{
    switch (form) {
    case ScalingForm::order_parameter: return "order_parameter";
    case ScalingForm::susceptibility: return "susceptibility";
    case ScalingForm::cluster_size: return "cluster_size";
    case ScalingForm::s2_ratio: return "s2_ratio";
    }
    return "unknown";
}

ScalingForm parse_scaling_form(const std::string& name)
{
    for (ScalingForm f : {ScalingForm::order_parameter, ScalingForm::susceptibility, ScalingForm::cluster_size,
                          ScalingForm::s2_ratio})
        if (to_string(f) == name) return f;
    throw std::invalid_argument("unknown scaling form '" + name + "'");
}

std::vector<std::string> exponent_names(ScalingForm form)
{
    switch (form) {
    case ScalingForm::order_parameter: return {"nu", "beta_over_nu"};
    case ScalingForm::susceptibility: return {"nu", "gamma_prime_over_nu"};
    case ScalingForm::cluster_size: return {"nu", "one_over_sigma_nu"};
    case ScalingForm::s2_ratio: return {"nu"};
    }
    return {};
}

namespace {

double exponent_of(const Exponents& e, const std::string& name)
{
    const auto it = e.find(name);
    if (it == e.end()) throw std::invalid_argument("missing exponent '" + name + "'");
    return it->second;
}

double value_power(const Exponents& e, ScalingForm form)
{
    switch (form) {
    case ScalingForm::order_parameter: return exponent_of(e, "beta_over_nu");
    case ScalingForm::susceptibility: return -exponent_of(e, "gamma_prime_over_nu");
    case ScalingForm::cluster_size: return -exponent_of(e, "one_over_sigma_nu");
    case ScalingForm::s2_ratio: return 0.0;
    }
    return 0.0;
}

struct Segment {
    double x;
    double y;
    double dy;
};

// y and dy of a sorted rescaled curve at x, which must lie inside its range.
Segment interpolate_rescaled(const std::vector<Segment>& c, double x)
{
    auto hi = std::lower_bound(c.begin(), c.end(), x, [](const Segment& p, double v) { return p.x < v; });
    if (hi->x == x || hi == c.begin()) return *hi;
    auto lo = hi - 1;
    const double t = (x - lo->x) / (hi->x - lo->x);
    return {x, lo->y + t * (hi->y - lo->y), lo->dy + t * (hi->dy - lo->dy)};
}

}  // namespace

std::vector<RescaledPoint> rescale(const CurveSet& curves, double rho_c, const Exponents& exponents, ScalingForm form)
{
    if (!(rho_c > 0.0)) throw std::domain_error("rescale: rho_c must be positive");
    const double nu = exponent_of(exponents, "nu");
    if (!(nu > 0.0)) throw std::domain_error("rescale: nu must be positive");
    const double power = value_power(exponents, form);
    std::vector<RescaledPoint> out;
    for (const auto& [n, curve] : curves) {
        const double nd = static_cast<double>(n);
        const double xscale = std::pow(nd, 1.0 / nu);
        const double yscale = std::pow(nd, power);
        for (const auto& p : sorted_curve(curve)) {
            if (!std::isfinite(p.value)) continue;
            out.push_back({n, (p.rho - rho_c) / rho_c * xscale, p.value * yscale,
                           std::isfinite(p.stderr_) ? p.stderr_ * yscale : 0.0});
        }
    }
    return out;
}

double collapse_quality(const CurveSet& curves, double rho_c, const Exponents& exponents, ScalingForm form)
{
    if (curves.size() < 2) throw std::invalid_argument("collapse_quality: needs at least 2 sizes");
    const auto points = rescale(curves, rho_c, exponents, form);
    std::map<std::uint32_t, std::vector<Segment>> by_size;
    bool weighted = true;
    for (const auto& p : points) {
        by_size[p.n_nodes].push_back({p.x, p.y, p.dy});
        if (!(p.dy > 0.0)) weighted = false;
    }
    for (auto& [n, c] : by_size)
        std::sort(c.begin(), c.end(), [](const Segment& a, const Segment& b) { return a.x < b.x; });

    double acc = 0.0;
    double norm = 0.0;
    std::size_t compared = 0;
    for (const auto& [n, curve] : by_size) {
        for (const Segment& p : curve) {
            double ysum = 0.0;
            double varsum = 0.0;
            std::size_t others = 0;
            for (const auto& [m, other] : by_size) {
                if (m == n || other.size() < 2) continue;
                if (p.x < other.front().x || p.x > other.back().x) continue;
                const Segment s = interpolate_rescaled(other, p.x);
                ysum += s.y;
                varsum += s.dy * s.dy;
                ++others;
            }
            if (others == 0) continue;
            const double k = static_cast<double>(others);
            const double master = ysum / k;
            const double dev2 = (p.y - master) * (p.y - master);
            if (weighted) {
                acc += dev2 / (p.dy * p.dy + varsum / (k * k));
            } else {
                acc += dev2;
                norm += p.y * p.y;
            }
            ++compared;
        }
    }
    if (compared == 0) throw std::domain_error("collapse_quality: rescaled curves do not overlap");
    if (weighted || norm == 0.0) return acc / static_cast<double>(compared);
    return acc / norm;
}

namespace {

class CollapseObjective {
public:
    CollapseObjective(const CurveSet& curves, double rho_c, ScalingForm form, std::vector<std::string> names,
                      std::vector<std::pair<double, double>> box)
        : curves_(curves), rho_c_(rho_c), form_(form), names_(std::move(names)), box_(std::move(box))
    {
    }

    [[nodiscard]] Exponents to_exponents(const std::vector<double>& v) const
    {
        Exponents e;
        for (std::size_t d = 0; d < names_.size(); ++d) e[names_[d]] = v[d];
        return e;
    }

    double operator()(const std::vector<double>& v) const
    {
        for (std::size_t d = 0; d < v.size(); ++d)
            if (v[d] < box_[d].first || v[d] > box_[d].second) return kInf;
        try {
            return collapse_quality(curves_, rho_c_, to_exponents(v), form_);
        } catch (const std::domain_error&) {
            return kInf;
        }
    }

private:
    const CurveSet& curves_;
    double rho_c_;
    ScalingForm form_;
    std::vector<std::string> names_;
    std::vector<std::pair<double, double>> box_;
};

struct SimplexResult {
    std::vector<double> x;
    double f;
    bool converged;
};

// Nelder-Mead with the standard coefficients (1, 2, 0.5, 0.5).
SimplexResult nelder_mead(const CollapseObjective& f, std::vector<double> start, const std::vector<double>& step,
                          std::size_t max_iterations, double tolerance)
{
    const std::size_t dim = start.size();
    std::vector<std::vector<double>> simplex{start};
    for (std::size_t d = 0; d < dim; ++d) {
        auto v = start;
        v[d] += step[d];
        if (!std::isfinite(f(v))) v[d] = start[d] - step[d];
        simplex.push_back(v);
    }
    std::vector<double> fx(simplex.size());
    for (std::size_t k = 0; k < simplex.size(); ++k) fx[k] = f(simplex[k]);

    auto order = [&] {
        std::vector<std::size_t> idx(simplex.size());
        for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
        std::vector<std::vector<double>> s2;
        std::vector<double> f2;
        for (std::size_t k : idx) {
            s2.push_back(simplex[k]);
            f2.push_back(fx[k]);
        }
        simplex = std::move(s2);
        fx = std::move(f2);
    };
    auto blend = [&](const std::vector<double>& a, const std::vector<double>& b, double t) {
        std::vector<double> out(dim);
        for (std::size_t d = 0; d < dim; ++d) out[d] = a[d] + t * (b[d] - a[d]);
        return out;
    };

    bool converged = false;
    for (std::size_t it = 0; it < max_iterations; ++it) {
        order();
        double size = 0.0;
        for (std::size_t k = 1; k < simplex.size(); ++k)
            for (std::size_t d = 0; d < dim; ++d)
                size = std::max(size, std::abs(simplex[k][d] - simplex[0][d]) / std::max(step[d], 1e-300));
        if ((std::isfinite(fx.back()) && fx.back() - fx.front() <= tolerance * (std::abs(fx.front()) + 1e-30)) ||
            size < 1e-9) {
            converged = true;
            break;
        }
        std::vector<double> centroid(dim, 0.0);
        for (std::size_t k = 0; k < dim; ++k)
            for (std::size_t d = 0; d < dim; ++d) centroid[d] += simplex[k][d] / static_cast<double>(dim);

        const auto& worst = simplex.back();
        const auto reflected = blend(centroid, worst, -1.0);
        const double fr = f(reflected);
        if (fr < fx.front()) {
            const auto expanded = blend(centroid, worst, -2.0);
            const double fe = f(expanded);
            if (fe < fr) {
                simplex.back() = expanded;
                fx.back() = fe;
            } else {
                simplex.back() = reflected;
                fx.back() = fr;
            }
        } else if (fr < fx[dim - 1]) {
            simplex.back() = reflected;
            fx.back() = fr;
        } else {
            const bool outside = fr < fx.back();
            const auto contracted = outside ? blend(centroid, reflected, 0.5) : blend(centroid, worst, 0.5);
            const double fc = f(contracted);
            if (fc < std::min(fr, fx.back())) {
                simplex.back() = contracted;
                fx.back() = fc;
            } else {
                for (std::size_t k = 1; k < simplex.size(); ++k) {
                    simplex[k] = blend(simplex[0], simplex[k], 0.5);
                    fx[k] = f(simplex[k]);
                }
            }
        }
    }
    order();
    return {simplex.front(), fx.front(), converged};
}

}  // namespace

CollapseResult optimize_collapse(const CurveSet& curves, double rho_c, ScalingForm form, const Exponents& initial,
                                 const ExponentBounds& bounds, const CollapseOptions& options)
{
    if (curves.size() < 2) throw std::invalid_argument("optimize_collapse: collapse needs at least 2 sizes");
    if (options.grid_steps < 2) throw std::invalid_argument("optimize_collapse: grid_steps must be >= 2");
    const auto names = exponent_names(form);
    std::vector<std::pair<double, double>> box;
    std::vector<double> start;
    for (const auto& name : names) {
        const auto b = bounds.find(name);
        if (b == bounds.end()) throw std::invalid_argument("optimize_collapse: missing bounds for '" + name + "'");
        if (!(b->second.first < b->second.second))
            throw std::invalid_argument("optimize_collapse: empty bounds for '" + name + "'");
        const double x0 = exponent_of(initial, name);
        if (x0 < b->second.first || x0 > b->second.second)
            throw std::invalid_argument("optimize_collapse: initial '" + name + "' outside bounds");
        box.push_back(b->second);
        start.push_back(x0);
    }
    const CollapseObjective objective(curves, rho_c, form, names, box);

    CollapseResult result;
    result.scaling_form = form;
    std::vector<double> best = start;
    double best_f = objective(start);
    std::vector<double> step(names.size());
    for (std::size_t d = 0; d < names.size(); ++d)
        step[d] = (box[d].second - box[d].first) / static_cast<double>(options.grid_steps - 1);

    // Coarse grid in lexicographic order.
    std::vector<std::size_t> idx(names.size(), 0);
    for (bool done = false; !done;) {
        std::vector<double> v(names.size());
        for (std::size_t d = 0; d < names.size(); ++d) v[d] = box[d].first + step[d] * static_cast<double>(idx[d]);
        const double q = objective(v);
        result.landscape.push_back({objective.to_exponents(v), q});
        if (q < best_f) {
            best_f = q;
            best = v;
        }
        for (std::size_t d = names.size();;) {
            if (d == 0) {
                done = true;
                break;
            }
            --d;
            if (++idx[d] < options.grid_steps) break;
            idx[d] = 0;
        }
    }
    if (!std::isfinite(best_f)) throw std::domain_error("optimize_collapse: no exponent in bounds gives overlapping curves");
    result.grid_quality = best_f;

    const SimplexResult refined = nelder_mead(objective, best, step, options.max_iterations, options.tolerance);
    if (refined.f <= best_f) {
        result.exponents = objective.to_exponents(refined.x);
        result.quality = refined.f;
    } else {
        result.exponents = objective.to_exponents(best);
        result.quality = best_f;
    }
    result.converged = refined.converged && refined.f <= best_f;
    return result;
}

double fit_mean_degree_coefficient(std::span<const std::pair<double, double>> rho_and_degree)
{
    double num = 0.0;
    double den = 0.0;
    for (const auto& [rho, k] : rho_and_degree) {
        num += rho * k;
        den += rho * rho;
    }
    if (!(den > 0.0)) throw std::invalid_argument("fit_mean_degree_coefficient: needs a point with rho > 0");
    return num / den;
}

PathScalingFit fit_path_scaling(std::span<const PathSample> points)
{
    std::vector<double> xs, ys;
    for (const auto& p : points) {
        if (!(p.avg_path > 0.0) || !(p.rho > 0.0) || !(p.n_nodes > 0.0))
            throw std::domain_error("fit_path_scaling: N, rho and <l> must be positive");
        xs.push_back(p.n_nodes);
        ys.push_back(p.avg_path * p.rho);
    }
    const PowerLawFit f = fit_power_law(xs, ys);
    return {f.exponent, std::exp(f.prefactor_log), f.residual};
}

PathGrowthTest discriminate_path_growth(std::span<const PathSample> points, double rejection_ratio)
{
    PathGrowthTest t;
    t.power = fit_path_scaling(points);
    t.power_residual = t.power.residual;

    std::vector<double> lnn, lr;
    for (const auto& p : points) {
        lnn.push_back(std::log(p.n_nodes));
        lr.push_back(p.avg_path * p.rho);
    }
    const LineFit lin = fit_line(lnn, lr, {});
    t.log_intercept = lin.intercept;
    t.log_slope = lin.slope;
    double ss = 0.0;
    for (std::size_t k = 0; k < lnn.size(); ++k) {
        const double pred = lin.intercept + lin.slope * lnn[k];
        if (!(pred > 0.0)) {
            ss = kInf;
            break;
        }
        const double r = std::log(lr[k]) - std::log(pred);
        ss += r * r;
    }
    t.log_residual = ss / static_cast<double>(lnn.size());
    t.rejects_logarithmic = t.log_residual > rejection_ratio * t.power_residual;
    return t;
}

}  // namespace qnet
