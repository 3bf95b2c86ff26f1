#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "detail.hpp"
#include "qnet/cli/commands.hpp"
#include "qnet/ensemble.hpp"

namespace qnet::cli {

namespace fs = std::filesystem;
using detail::json;

namespace {

/// Linear interpolation on a curve sorted by rho; nullopt outside its range.
std::optional<double> value_at(const Curve& c, double rho)
{
    if (c.empty() || rho < c.front().rho || rho > c.back().rho) return std::nullopt;
    for (std::size_t k = 1; k < c.size(); ++k) {
        if (rho <= c[k].rho) {
            const double t = (rho - c[k - 1].rho) / (c[k].rho - c[k - 1].rho);
            return c[k - 1].value + t * (c[k].value - c[k - 1].value);
        }
    }
    return c.back().value;
}

template <class F>
json attempt(F&& f)
{
    try {
        return f();
    } catch (const SchemaError&) {
        throw;
    } catch (const std::exception& e) {
        return {{"error", e.what()}};
    }
}

json size_list(const CurveSet& curves)
{
    json out = json::array();
    for (const auto& [n, c] : curves) out.push_back(n);
    return out;
}

json input_list(const std::vector<fs::path>& inputs)
{
    json out = json::array();
    for (const auto& p : inputs) out.push_back(p.generic_string());
    return out;
}

std::vector<std::pair<std::string, std::string>> split_assignments(const std::string& text)
{
    std::vector<std::pair<std::string, std::string>> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw std::invalid_argument("expected name=value, got '" + item + "'");
        out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
    return out;
}

/// Locates ns.csv beside each input and returns n(s) for the largest N at
/// the density closest to rho_c.
struct NsChoice {
    std::uint32_t n_nodes = 0;
    double rho = 0.0;
    std::map<std::uint32_t, double> n_s;
    std::string source;
};

std::optional<NsChoice> pick_ns(const std::vector<fs::path>& inputs, double rho_c)
{
    std::optional<NsChoice> best;
    for (const auto& in : inputs) {
        const fs::path dir = fs::is_directory(in) ? in : in.parent_path();
        const fs::path path = (dir.empty() ? fs::path(".") : dir) / "ns.csv";
        if (!fs::exists(path)) continue;
        const CsvTable t = read_csv(path);
        const auto c_rho = t.column("rho"), c_n = t.column("n_nodes"), c_s = t.column("s"), c_v = t.column("n_s");
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const auto n = static_cast<std::uint32_t>(t.number(r, c_n));
            const double rho = t.number(r, c_rho);
            const bool better = !best || n > best->n_nodes ||
                                (n == best->n_nodes && std::abs(rho - rho_c) < std::abs(best->rho - rho_c));
            if (better) best = NsChoice{n, rho, {}, path.generic_string()};
        }
        if (best && best->source == path.generic_string()) {
            best->n_s.clear();
            for (std::size_t r = 0; r < t.rows.size(); ++r)
                if (static_cast<std::uint32_t>(t.number(r, c_n)) == best->n_nodes && t.number(r, c_rho) == best->rho)
                    best->n_s[static_cast<std::uint32_t>(t.number(r, c_s))] = t.number(r, c_v);
        }
    }
    return best;
}

}  // namespace

void cmd_critical(const CriticalOptions& options, const fs::path& out, const CommandContext& ctx)
{
    const auto tables = detail::load_sweep_tables(options.inputs);
    const auto rows = detail::rows_of(tables);
    const CurveSet ratio = detail::density_curves(rows, "s2_over_s1", "s2_over_s1_stderr");
    const CurveSet order = detail::density_curves(rows, "m", "m_stderr");
    const CurveSet binder = detail::density_curves(rows, "binder");
    if (ratio.size() < 2)
        throw std::invalid_argument("critical: density sweeps for at least two system sizes are required, found " +
                                    std::to_string(ratio.size()));

    json result;
    result["inputs"] = input_list(options.inputs);
    result["sizes"] = size_list(ratio);

    double rho_c = 0.0;
    if (options.rho_c) {
        rho_c = *options.rho_c;
        result["rho_c"] = {{"value", rho_c}, {"method", "given"}};
        result["rho_c_s2_over_s1_crossing"] = attempt([&] { return detail::to_json(find_crossing(ratio)); });
    } else {
        const CrossingEstimate c = find_crossing(ratio);
        rho_c = c.rho_c;
        result["rho_c"] = detail::to_json(c);
        result["rho_c"]["method"] = "s2_over_s1_crossing";
    }
    result["rho_c_order_parameter_crossing"] = attempt([&] { return detail::to_json(find_crossing(order)); });
    result["rho_c_binder_crossing"] = attempt([&] { return detail::to_json(find_crossing(binder)); });

    result["beta_over_nu"] = attempt([&] {
        std::map<std::uint32_t, double> m_at;
        json values = json::object();
        for (const auto& [n, c] : order) {
            if (auto v = value_at(c, rho_c)) {
                m_at[n] = *v;
                values[std::to_string(n)] = *v;
            }
        }
        json j = detail::to_json(estimate_beta_over_nu(m_at));
        j["m_at_rho_c"] = values;
        return j;
    });

    result["beta"] = attempt([&] {
        if (order.empty()) throw std::invalid_argument("no order-parameter curve");
        const auto& [n, curve] = *order.rbegin();
        json j = detail::to_json(estimate_order_exponent(curve, rho_c, options.beta_window));
        j["n_nodes"] = n;
        j["window"] = {{"reduced_lo", options.beta_window.lo}, {"reduced_hi", options.beta_window.hi}};
        return j;
    });

    result["tau"] = attempt([&] {
        const auto choice = pick_ns(options.inputs, rho_c);
        if (!choice) throw std::invalid_argument("no ns.csv found beside the inputs");
        TauOptions tau = options.tau;
        const auto cap = static_cast<std::uint32_t>(std::floor(options.tau_max_fraction * choice->n_nodes));
        tau.max_size = std::min(tau.max_size, cap);
        json j = detail::to_json(estimate_tau(choice->n_s, tau));
        j["n_nodes"] = choice->n_nodes;
        j["rho"] = choice->rho;
        j["source"] = choice->source;
        j["window"] = {{"min_size", tau.min_size},
                       {"max_size", tau.max_size},
                       {"binning", tau.binning == Binning::logarithmic ? "log" : "raw"},
                       {"bin_ratio", tau.bin_ratio}};
        return j;
    });

    result["mean_degree_coefficient"] = attempt([&] {
        std::vector<std::pair<double, double>> pts;
        const std::string density_axis = qnet::to_string(SweepAxis::density_fixed_N);
        for (const auto& r : rows)
            if (r.axis() == density_axis) pts.emplace_back(r.number("rho"), r.number("mean_degree"));
        const double a = fit_mean_degree_coefficient(pts);
        double ss = 0.0;
        for (const auto& [rho, k] : pts) ss += (k - a * rho) * (k - a * rho);
        return json{{"A", a},
                    {"k_c", a * rho_c},
                    {"residual", ss / static_cast<double>(pts.size())},
                    {"n_points", pts.size()},
                    {"window", {{"axis", density_axis}}}};
    });

    result["path_scaling"] = attempt([&] {
        std::vector<PathSample> pts;
        for (const auto& r : rows) {
            if (!r.has("avg_path")) continue;
            const double l = r.number("avg_path");
            if (std::isfinite(l) && l > 0.0 && r.number("m") >= options.path_min_m)
                pts.push_back({r.number("n_nodes"), r.number("rho"), l});
        }
        const PathGrowthTest t = discriminate_path_growth(pts);
        return json{{"alpha", t.power.alpha},
                    {"prefactor", t.power.prefactor},
                    {"residual", t.power_residual},
                    {"n_points", pts.size()},
                    {"log_model", {{"intercept", t.log_intercept}, {"slope", t.log_slope}, {"residual", t.log_residual}}},
                    {"rejects_logarithmic", t.rejects_logarithmic},
                    {"window", {{"min_m", options.path_min_m}}}};
    });

    fs::create_directories(out);
    detail::write_json(out / "critical.json", result);
    detail::Manifest manifest("critical", ctx);
    manifest.body()["inputs"] = input_list(options.inputs);
    manifest.add_json("critical.json");
    manifest.write(out);
}

ExponentBounds parse_bounds(const std::string& text)
{
    ExponentBounds out;
    for (const auto& [name, range] : split_assignments(text)) {
        const auto colon = range.find(':');
        if (colon == std::string::npos) throw std::invalid_argument("bounds for '" + name + "' must be lo:hi");
        out[name] = {parse_double(range.substr(0, colon)), parse_double(range.substr(colon + 1))};
    }
    return out;
}

Exponents parse_exponents(const std::string& text)
{
    Exponents out;
    for (const auto& [name, value] : split_assignments(text)) out[name] = parse_double(value);
    return out;
}

namespace {

std::pair<std::string, std::optional<std::string>> form_columns(ScalingForm form)
{
    switch (form) {
    case ScalingForm::order_parameter: return {"m", "m_stderr"};
    case ScalingForm::susceptibility: return {"chi", std::nullopt};
    case ScalingForm::cluster_size: return {"s_star", std::nullopt};
    case ScalingForm::s2_ratio: return {"s2_over_s1", "s2_over_s1_stderr"};
    }
    return {"s2_over_s1", std::nullopt};
}

std::pair<double, double> default_bounds(const std::string& name)
{
    if (name == "nu") return {0.5, 6.0};
    if (name == "beta_over_nu") return {0.0, 0.5};
    return {0.0, 2.0};
}

json exponents_json(const Exponents& e)
{
    json j = json::object();
    for (const auto& [k, v] : e) j[k] = v;
    return j;
}

}  // namespace

void cmd_collapse(const CollapseCommandOptions& options, const fs::path& out, const CommandContext& ctx)
{
    const auto tables = detail::load_sweep_tables(options.inputs);
    const auto rows = detail::rows_of(tables);
    const auto [value_col, stderr_col] = form_columns(options.form);

    double rho_c = 0.0;
    std::string rho_c_method = "given";
    if (options.rho_c) {
        rho_c = *options.rho_c;
    } else {
        rho_c = find_crossing(detail::density_curves(rows, "s2_over_s1", "s2_over_s1_stderr")).rho_c;
        rho_c_method = "s2_over_s1_crossing";
    }
    if (!(rho_c > 0.0)) throw std::invalid_argument("collapse: rho_c must be positive");

    CurveSet curves = detail::density_curves(rows, value_col, stderr_col);
    for (auto it = curves.begin(); it != curves.end();) {
        auto& c = it->second;
        std::erase_if(c, [&](const CurvePoint& p) { return std::abs(p.rho - rho_c) / rho_c > options.window; });
        it = c.size() < 2 ? curves.erase(it) : std::next(it);
    }
    if (curves.size() < 2)
        throw std::invalid_argument("collapse: needs at least two system sizes with >= 2 points inside the window");

    ExponentBounds bounds;
    Exponents initial;
    for (const auto& name : exponent_names(options.form)) {
        auto b = options.bounds.find(name);
        bounds[name] = b != options.bounds.end() ? b->second : default_bounds(name);
        auto i = options.initial.find(name);
        initial[name] = i != options.initial.end() ? i->second : 0.5 * (bounds[name].first + bounds[name].second);
    }

    CollapseOptions copt;
    copt.grid_steps = options.grid_steps;
    const CollapseResult r = optimize_collapse(curves, rho_c, options.form, initial, bounds, copt);

    fs::create_directories(out);
    detail::Manifest manifest("collapse", ctx);
    {
        CsvWriter w(out / "rescaled.csv", {"n_nodes", "x", "y", "dy"});
        for (const auto& p : rescale(curves, rho_c, r.exponents, options.form))
            w.row({std::to_string(p.n_nodes), format_double(p.x), format_double(p.y), format_double(p.dy)});
        w.flush();
        manifest.add_csv("rescaled.csv", w.rows());
    }

    json j;
    j["inputs"] = input_list(options.inputs);
    j["form"] = to_string(options.form);
    j["value_column"] = value_col;
    j["rho_c"] = {{"value", rho_c}, {"method", rho_c_method}};
    j["window"] = {{"max_reduced_distance", options.window}};
    j["sizes"] = size_list(curves);
    json jb = json::object();
    for (const auto& [name, lohi] : bounds) jb[name] = {lohi.first, lohi.second};
    j["bounds"] = jb;
    j["initial"] = exponents_json(initial);
    j["exponents"] = exponents_json(r.exponents);
    j["quality"] = r.quality;
    j["grid_quality"] = r.grid_quality;
    j["converged"] = r.converged;
    j["grid_steps"] = options.grid_steps;
    json land = json::array();
    for (const auto& s : r.landscape) {
        json e = exponents_json(s.exponents);
        e["quality"] = s.quality;
        land.push_back(e);
    }
    j["landscape"] = land;
    detail::write_json(out / "collapse.json", j);
    manifest.add_json("collapse.json");
    manifest.body()["inputs"] = input_list(options.inputs);
    manifest.write(out);
}

}  // namespace qnet::cli
