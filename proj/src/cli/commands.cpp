#include "qnet/cli/commands.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <set>

#include "detail.hpp"
#include "qnet/ensemble.hpp"
#include "qnet/metrics.hpp"
#include "qnet/model.hpp"

namespace qnet::cli {

namespace fs = std::filesystem;
using detail::json;

namespace detail {

void write_json(const fs::path& path, const json& value)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << value.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void Manifest::write(const fs::path& dir, const std::string& status) const
{
    json m;
    m["tool"] = "qnetsim";
    m["tool_version"] = kToolVersion;
    m["command"] = command_;
    m["timestamp"] = timestamp_;
    m["status"] = status;
    for (const auto& [k, v] : body_.items()) m[k] = v;
    json files = json::array();
    for (const auto& f : files_) {
        json e;
        e["name"] = f.name;
        if (f.rows) e["rows"] = *f.rows;
        else e["rows"] = nullptr;
        files.push_back(e);
    }
    files.push_back({{"name", "manifest.json"}, {"rows", nullptr}});
    m["files"] = files;
    write_json(dir / "manifest.json", m);
}

std::string SweepRow::axis() const
{
    return table->has_column("axis") ? text("axis") : qnet::to_string(SweepAxis::density_fixed_N);
}

std::vector<CsvTable> load_sweep_tables(const std::vector<fs::path>& inputs)
{
    if (inputs.empty()) throw std::invalid_argument("no input sweep files given");
    std::vector<CsvTable> tables;
    for (const auto& in : inputs) tables.push_back(read_csv(fs::is_directory(in) ? in / "sweep.csv" : in));
    return tables;
}

std::vector<SweepRow> rows_of(const std::vector<CsvTable>& tables)
{
    std::vector<SweepRow> rows;
    for (const auto& t : tables)
        for (std::size_t k = 0; k < t.rows.size(); ++k) rows.push_back({&t, k});
    return rows;
}

CurveSet density_curves(const std::vector<SweepRow>& rows, const std::string& value_col,
                        const std::optional<std::string>& stderr_col)
{
    CurveSet curves;
    const std::string density_axis = qnet::to_string(SweepAxis::density_fixed_N);
    for (const auto& r : rows) {
        (void)r.table->column("rho");
        (void)r.table->column("n_nodes");
        (void)r.table->column(value_col);
        if (r.axis() != density_axis) continue;
        const double value = r.number(value_col);
        if (!std::isfinite(value)) continue;
        const double err = stderr_col && r.has(*stderr_col) ? r.number(*stderr_col) : 0.0;
        curves[static_cast<std::uint32_t>(r.number("n_nodes"))].push_back({r.number("rho"), value, err});
    }
    for (auto it = curves.begin(); it != curves.end();) {
        auto& c = it->second;
        std::sort(c.begin(), c.end(), [](const CurvePoint& a, const CurvePoint& b) { return a.rho < b.rho; });
        for (std::size_t k = 1; k < c.size(); ++k)
            if (c[k].rho == c[k - 1].rho)
                throw std::invalid_argument("duplicate point N=" + std::to_string(it->first) +
                                            " rho=" + format_double(c[k].rho) + " across inputs");
        it = c.size() < 2 ? curves.erase(it) : std::next(it);
    }
    return curves;
}

json to_json(const PowerLawFit& fit)
{
    return {{"value", fit.exponent},
            {"stderr", fit.exponent_stderr},
            {"prefactor_log", fit.prefactor_log},
            {"residual", fit.residual},
            {"n_points", fit.n_points}};
}

json to_json(const CrossingEstimate& c)
{
    json pairs = json::array();
    for (const auto& p : c.pairwise_crossings) pairs.push_back({{"n_small", p.n_small}, {"n_large", p.n_large}, {"rho", p.rho}});
    return {{"value", c.rho_c}, {"spread", c.spread}, {"pairwise", pairs}};
}

}  // namespace detail

std::string manifest_timestamp()
{
    std::time_t t = std::time(nullptr);
    if (const char* sde = std::getenv("SOURCE_DATE_EPOCH"); sde && *sde) t = static_cast<std::time_t>(std::strtoll(sde, nullptr, 10));
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

namespace {

json seed_json(std::uint64_t base, std::uint64_t index) { return {{"base_seed", base}, {"realization_index", index}}; }

json config_echo(const ScenarioConfig& config) { return config.to_text(); }

RunOptions run_options(const ScenarioConfig& config, unsigned threads)
{
    return {config.measure_paths, config.layer, config.max_exact_sources, threads};
}

std::size_t write_edges(const fs::path& path, const NetworkGraph& g, const NodePositions& pos)
{
    CsvWriter w(path, {"node_i", "node_j", "distance_km"});
    for (const auto& e : g.edges)
        w.row({std::to_string(e.i), std::to_string(e.j), format_double(distance_km(pos.coords[e.i], pos.coords[e.j]))});
    w.flush();
    return w.rows();
}

json ensemble_json(const EnsemblePoint& p)
{
    return {{"realizations", p.n_realizations},
            {"m", p.m},
            {"m_stderr", p.m_stderr},
            {"chi", p.chi},
            {"binder", p.binder},
            {"s2_over_s1", p.s2_over_s1},
            {"mean_degree", p.mean_degree},
            {"avg_clustering", p.avg_clustering},
            {"avg_path", p.avg_path},
            {"s_star", p.s_star}};
}

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted.store(true); }

}  // namespace

void install_interrupt_handlers()
{
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
}

void cmd_generate(const ScenarioConfig& config, const fs::path& out, const CommandContext& ctx,
                  const GenerateOptions& options)
{
    config.validate();
    fs::create_directories(out);
    const ModelParams& params = config.model;
    const SeedSpec seed{config.base_seed, options.realization_index};
    detail::Manifest manifest("generate", ctx);

    const NodePositions pos = sample_node_positions(params, seed);
    const Realization graphs = generate_realization(pos.coords, params, seed, ctx.threads);

    {
        CsvWriter w(out / "nodes.csv", {"node_id", "x_km", "y_km"});
        for (std::size_t k = 0; k < pos.coords.size(); ++k)
            w.row({std::to_string(k), format_double(pos.coords[k].x_km), format_double(pos.coords[k].y_km)});
        w.flush();
        manifest.add_csv("nodes.csv", w.rows());
    }
    manifest.add_csv("fiber_edges.csv", write_edges(out / "fiber_edges.csv", graphs.fiber, pos));
    manifest.add_csv("photonic_edges.csv", write_edges(out / "photonic_edges.csv", graphs.photonic, pos));

    const NetworkGraph& g = config.layer == Layer::fiber ? graphs.fiber : graphs.photonic;
    const ClusterDecomposition decomp = connected_components(g);
    const double n = static_cast<double>(g.n_nodes);
    json stats;
    stats["n_nodes"] = params.n_nodes;
    stats["radius_km"] = params.radius_km;
    stats["rho"] = params.density();
    stats["layer"] = to_string(config.layer);
    stats["seed"] = seed_json(seed.base_seed, seed.realization_index);
    stats["interaction_cutoff_km"] = interaction_cutoff(params);
    stats["n_fiber_edges"] = graphs.fiber.edges.size();
    stats["n_photonic_edges"] = graphs.photonic.edges.size();
    stats["s1"] = decomp.s1();
    stats["s2"] = decomp.s2();
    stats["giant_fraction"] = decomp.s1() / n;
    stats["mean_degree"] = 2.0 * static_cast<double>(g.edges.size()) / n;
    stats["avg_clustering"] = average_clustering(g);
    if (decomp.s1() >= 2) {
        const PathStats ps = average_shortest_path(g, {config.max_exact_sources, ctx.threads}, seed);
        stats["avg_path"] = ps.mean_shortest_path;
        stats["avg_path_stderr"] = ps.stderr_;
        stats["avg_path_exact"] = ps.exact;
    } else {
        stats["avg_path"] = nullptr;
    }

    json seeds;
    seeds["realization"] = seed_json(seed.base_seed, seed.realization_index);
    if (options.ensemble) {
        const EnsemblePoint p = run_ensemble(params, config.realizations, config.base_seed, run_options(config, ctx.threads));
        stats["ensemble"] = ensemble_json(p);
        seeds["ensemble"] = {{"base_seed", config.base_seed}, {"realization_indices", {0, config.realizations - 1}}};
    }
    detail::write_json(out / "realization_stats.json", stats);
    manifest.add_json("realization_stats.json");

    manifest.body()["config_text"] = config_echo(config);
    manifest.body()["seeds"] = seeds;
    manifest.body()["ensemble"] = options.ensemble;
    manifest.write(out);
}

void cmd_sweep(const ScenarioConfig& config, const fs::path& out, const CommandContext& ctx)
{
    config.validate();
    if (!config.sweep) throw std::invalid_argument("sweep: config has no [sweep] section");
    const SweepSpec& spec = *config.sweep;
    const bool size_axis = spec.axis == SweepAxis::size_fixed_rho || spec.axis == SweepAxis::size_fixed_radius;
    if (size_axis && !spec.sizes.empty())
        throw std::invalid_argument("sweep: 'sizes' cannot be combined with a size axis");
    const std::vector<double> grid = spec.grid.expand();
    std::vector<std::uint32_t> sizes = spec.sizes;
    if (sizes.empty()) sizes.push_back(config.model.n_nodes);
    // Validate every point before any work is done.
    for (std::uint32_t n : sizes) {
        ModelParams base = config.model;
        base.n_nodes = n;
        for (double v : grid) (void)apply_sweep_value(base, spec.axis, v);
    }

    fs::create_directories(out);
    detail::Manifest manifest("sweep", ctx);
    manifest.body()["config_text"] = config_echo(config);

    CsvWriter sweep_csv(out / "sweep.csv",
                        {"rho", "n_nodes", "radius_km", "m", "m_stderr", "chi", "binder", "s2_over_s1", "mean_degree",
                         "avg_clustering", "avg_path", "s_star", "s2_over_s1_stderr", "mean_degree_stderr",
                         "avg_clustering_stderr", "avg_path_stderr", "n_realizations", "n_pulses", "loss_db_per_km",
                         "axis", "grid_value"});
    CsvWriter ns_csv(out / "ns.csv", {"rho", "n_nodes", "s", "n_s"});
    CsvWriter degree_csv(out / "degree.csv", {"rho", "n_nodes", "radius_km", "k", "count", "P_k", "axis"});
    std::optional<CsvWriter> per_real;
    if (config.emit_per_realization)
        per_real.emplace(out / "per_realization.csv",
                         std::vector<std::string>{"rho", "n_nodes", "radius_km", "grid_index", "realization", "s1", "s2",
                                                  "n_edges", "mean_degree", "avg_clustering", "avg_path"});

    const std::string axis_name = qnet::to_string(spec.axis);
    json seeds = json::array();
    auto record_files = [&] {
        manifest.add_csv("sweep.csv", sweep_csv.rows());
        manifest.add_csv("ns.csv", ns_csv.rows());
        manifest.add_csv("degree.csv", degree_csv.rows());
        if (per_real) manifest.add_csv("per_realization.csv", per_real->rows());
        manifest.body()["seeds"] = seeds;
    };

    g_interrupted.store(false);
    try {
        for (std::uint32_t n : sizes) {
            ModelParams base = config.model;
            base.n_nodes = n;
            const std::uint64_t base_seed = spec.sizes.empty() ? config.base_seed : derive_seed(config.base_seed, n);
            for (std::size_t k = 0; k < grid.size(); ++k)
                seeds.push_back({{"n_nodes", n}, {"grid_index", k}, {"grid_value", grid[k]},
                                 {"base_seed", sweep_point_seed(base_seed, k)}});
            auto observer = [&](std::size_t k, const EnsemblePoint& p, std::span<const RealizationRecord> records) {
                const ModelParams params = apply_sweep_value(base, spec.axis, grid[k]);
                const std::string rho = format_double(p.rho);
                const std::string nn = std::to_string(p.n_nodes);
                const std::string radius = format_double(p.radius_km);
                sweep_csv.row({rho, nn, radius, format_double(p.m), format_double(p.m_stderr), format_double(p.chi),
                               format_double(p.binder), format_double(p.s2_over_s1), format_double(p.mean_degree),
                               format_double(p.avg_clustering), format_double(p.avg_path), format_double(p.s_star),
                               format_double(p.s2_over_s1_stderr), format_double(p.mean_degree_stderr),
                               format_double(p.avg_clustering_stderr), format_double(p.avg_path_stderr),
                               std::to_string(p.n_realizations), std::to_string(params.n_pulses),
                               format_double(params.loss_db_per_km), axis_name, format_double(grid[k])});
                for (const auto& [s, v] : p.n_s) ns_csv.row({rho, nn, std::to_string(s), format_double(v)});
                std::uint64_t total = 0;
                for (const auto& [deg, c] : p.degree_counts) total += c;
                for (const auto& [deg, c] : p.degree_counts)
                    degree_csv.row({rho, nn, radius, std::to_string(deg), std::to_string(c),
                                    format_double(static_cast<double>(c) / static_cast<double>(total)), axis_name});
                if (per_real) {
                    for (std::size_t r = 0; r < records.size(); ++r) {
                        const auto& rec = records[r];
                        per_real->row({rho, nn, radius, std::to_string(k), std::to_string(r), std::to_string(rec.s1),
                                       std::to_string(rec.s2), std::to_string(rec.n_edges),
                                       format_double(rec.mean_degree()), format_double(rec.avg_clustering),
                                       format_double(rec.path_stats ? rec.path_stats->mean_shortest_path : NAN)});
                    }
                    per_real->flush();
                }
                sweep_csv.flush();
                ns_csv.flush();
                degree_csv.flush();
                if (g_interrupted.load()) throw Interrupted("interrupted by signal");
            };
            (void)qnet::sweep(base, spec.axis, grid, config.realizations, base_seed,
                              run_options(config, ctx.threads), observer);
        }
    } catch (const std::exception& e) {
        const std::string reason = e.what();
        sweep_csv.marker("#FAILED," + reason);
        ns_csv.marker("#FAILED," + reason);
        degree_csv.marker("#FAILED," + reason);
        if (per_real) per_real->marker("#FAILED," + reason);
        record_files();
        manifest.body()["error"] = reason;
        manifest.write(out, "failed");
        throw;
    }
    record_files();
    manifest.write(out);
}

}  // namespace qnet::cli
