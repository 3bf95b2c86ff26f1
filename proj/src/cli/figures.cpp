#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "detail.hpp"
#include "qnet/cli/commands.hpp"
#include "qnet/ensemble.hpp"
#include "qnet/metrics.hpp"

namespace qnet::cli {

namespace fs = std::filesystem;

namespace {

struct Inputs {
    std::vector<CsvTable> sweeps;
    std::vector<CsvTable> degrees;
    std::vector<CsvTable> ns;
    std::vector<fs::path> generate_dirs;
    std::vector<fs::path> collapse_dirs;
};

Inputs scan(const fs::path& root)
{
    if (!fs::is_directory(root)) throw std::invalid_argument("figures: input directory " + root.string() + " not found");
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    Inputs in;
    for (const auto& f : files) {
        const std::string name = f.filename().string();
        if (name == "sweep.csv") in.sweeps.push_back(read_csv(f));
        else if (name == "degree.csv") in.degrees.push_back(read_csv(f));
        else if (name == "ns.csv") in.ns.push_back(read_csv(f));
        else if (name == "nodes.csv") in.generate_dirs.push_back(f.parent_path());
        else if (name == "rescaled.csv" && fs::exists(f.parent_path() / "collapse.json")) in.collapse_dirs.push_back(f.parent_path());
    }
    return in;
}

bool is_axis(const detail::SweepRow& r, SweepAxis axis) { return r.axis() == qnet::to_string(axis); }

/// Copies the named sweep columns verbatim for every row passing `keep`.
std::size_t copy_columns(const fs::path& path, const std::vector<detail::SweepRow>& rows,
                         const std::vector<std::string>& columns,
                         const std::function<bool(const detail::SweepRow&)>& keep)
{
    CsvWriter w(path, columns);
    for (const auto& r : rows) {
        if (!keep(r)) continue;
        std::vector<std::string> fields;
        for (const auto& c : columns) fields.push_back(r.text(c));
        w.row(fields);
    }
    w.flush();
    return w.rows();
}

struct DegreeGroup {
    std::map<std::uint32_t, std::uint64_t> counts;
};

/// Degree distributions grouped by (rho text, N) for the given sweep axes.
std::size_t write_degree_figure(const fs::path& path, const std::vector<CsvTable>& tables,
                                const std::set<std::string>& axes)
{
    std::map<std::pair<std::string, std::uint32_t>, DegreeGroup> groups;
    std::vector<std::pair<std::string, std::uint32_t>> order;
    for (const auto& t : tables) {
        const auto c_rho = t.column("rho"), c_n = t.column("n_nodes"), c_k = t.column("k"), c_c = t.column("count");
        const bool has_axis = t.has_column("axis");
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const std::string axis =
                has_axis ? t.rows[r][t.column("axis")] : qnet::to_string(SweepAxis::density_fixed_N);
            if (!axes.contains(axis)) continue;
            const auto key = std::make_pair(t.rows[r][c_rho], static_cast<std::uint32_t>(t.number(r, c_n)));
            if (!groups.contains(key)) order.push_back(key);
            groups[key].counts[static_cast<std::uint32_t>(t.number(r, c_k))] +=
                static_cast<std::uint64_t>(t.number(r, c_c));
        }
    }
    CsvWriter w(path, {"rho", "n_nodes", "k", "empirical_P_k", "poisson_P_k", "poisson_mean"});
    for (const auto& key : order) {
        const auto& counts = groups[key].counts;
        std::uint64_t total = 0;
        double weighted = 0.0;
        for (const auto& [k, c] : counts) {
            total += c;
            weighted += static_cast<double>(k) * static_cast<double>(c);
        }
        const double mean = weighted / static_cast<double>(total);
        const std::uint32_t k_max = counts.rbegin()->first;
        for (std::uint32_t k = 0; k <= k_max; ++k) {
            const auto it = counts.find(k);
            const double emp = it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total);
            w.row({key.first, std::to_string(key.second), std::to_string(k), format_double(emp),
                   format_double(poisson_pmf(k, mean)), format_double(mean)});
        }
    }
    w.flush();
    return w.rows();
}

NetworkGraph read_graph(const fs::path& edges, std::uint32_t n, Layer layer)
{
    const CsvTable t = read_csv(edges);
    const auto ci = t.column("node_i"), cj = t.column("node_j");
    NetworkGraph g{n, {}, layer};
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        g.edges.push_back({static_cast<NodeId>(t.number(r, ci)), static_cast<NodeId>(t.number(r, cj))});
    return g;
}

}  // namespace

FiguresResult cmd_figures(const fs::path& input_dir, const fs::path& out, const CommandContext& ctx,
                          const std::vector<std::string>& only)
{
    const Inputs in = scan(input_dir);
    const auto rows = detail::rows_of(in.sweeps);
    fs::create_directories(out);
    detail::Manifest manifest("figures", ctx);
    FiguresResult result;

    auto any = [&](const std::function<bool(const detail::SweepRow&)>& pred) {
        return std::any_of(rows.begin(), rows.end(), pred);
    };
    auto density = [](const detail::SweepRow& r) { return is_axis(r, SweepAxis::density_fixed_N); };
    auto has_path = [](const detail::SweepRow& r) {
        return r.has("avg_path") && std::isfinite(r.number("avg_path"));
    };
    auto clustering_rows = [](const detail::SweepRow& r) {
        return is_axis(r, SweepAxis::size_fixed_radius) || is_axis(r, SweepAxis::density_fixed_N);
    };

    struct Figure {
        std::string id;
        std::string requirement;
        std::function<bool()> available;
        std::function<void()> write;
    };
    auto csv = [&](const std::string& name, std::size_t n_rows) {
        manifest.add_csv(name, n_rows);
        result.written.push_back(name);
    };

    std::vector<Figure> figures;
    figures.push_back({"fig1", "a generate output (nodes.csv)", [&] { return !in.generate_dirs.empty(); }, [&] {
        const fs::path dir = in.generate_dirs.front();
        const CsvTable nodes = read_csv(dir / "nodes.csv");
        const auto n = static_cast<std::uint32_t>(nodes.rows.size());
        const NetworkGraph fiber = read_graph(dir / "fiber_edges.csv", n, Layer::fiber);
        const NetworkGraph photonic = read_graph(dir / "photonic_edges.csv", n, Layer::photonic);
        std::vector<std::uint32_t> deg(n, 0);
        for (const auto& e : photonic.edges) ++deg[e.i], ++deg[e.j];
        const ClusterDecomposition decomp = connected_components(photonic);
        const auto cx = nodes.column("x_km"), cy = nodes.column("y_km");
        {
            CsvWriter w(out / "fig1_nodes.csv", {"node_id", "x_km", "y_km", "photonic_degree", "in_giant"});
            for (std::uint32_t v = 0; v < n; ++v)
                w.row({std::to_string(v), nodes.rows[v][cx], nodes.rows[v][cy], std::to_string(deg[v]),
                       decomp.labels[v] == 0 ? "1" : "0"});
            w.flush();
            csv("fig1_nodes.csv", w.rows());
        }
        CsvWriter w(out / "fig1_edges.csv", {"layer", "node_i", "node_j", "x_i_km", "y_i_km", "x_j_km", "y_j_km"});
        for (const NetworkGraph* g : {&fiber, &photonic})
            for (const auto& e : g->edges)
                w.row({to_string(g->layer), std::to_string(e.i), std::to_string(e.j), nodes.rows[e.i][cx],
                       nodes.rows[e.i][cy], nodes.rows[e.j][cx], nodes.rows[e.j][cy]});
        w.flush();
        csv("fig1_edges.csv", w.rows());
        CsvWriter s(out / "fig1_summary.csv", {"n_nodes", "giant_size", "giant_fraction", "source"});
        s.row({std::to_string(n), std::to_string(decomp.s1()),
               format_double(n ? static_cast<double>(decomp.s1()) / n : 0.0), dir.generic_string()});
        s.flush();
        csv("fig1_summary.csv", s.rows());
    }});
    auto has_degree_axis = [&](const std::string& axis) {
        for (const auto& t : in.degrees) {
            if (!t.has_column("axis")) return axis == qnet::to_string(SweepAxis::density_fixed_N) && !t.rows.empty();
            for (const auto& r : t.rows)
                if (r[t.column("axis")] == axis) return true;
        }
        return false;
    };
    const std::string fixed_rho = qnet::to_string(SweepAxis::size_fixed_rho);
    const std::string fixed_n = qnet::to_string(SweepAxis::density_fixed_N);
    figures.push_back({"fig2a", "degree.csv from a size_fixed_rho sweep", [&] { return has_degree_axis(fixed_rho); },
                       [&] { csv("fig2a_degree_dist.csv", write_degree_figure(out / "fig2a_degree_dist.csv", in.degrees, {fixed_rho})); }});
    figures.push_back({"fig2b", "degree.csv from a density_fixed_N sweep", [&] { return has_degree_axis(fixed_n); },
                       [&] { csv("fig2b_degree_dist.csv", write_degree_figure(out / "fig2b_degree_dist.csv", in.degrees, {fixed_n})); }});
    figures.push_back({"fig2c", "sweep.csv from a density_fixed_N sweep", [&] { return any(density); }, [&] {
        csv("fig2c_giant_vs_rho.csv",
            copy_columns(out / "fig2c_giant_vs_rho.csv", rows,
                         {"rho", "n_nodes", "radius_km", "m", "m_stderr", "n_pulses", "loss_db_per_km"}, density));
    }});
    auto radius = [](const detail::SweepRow& r) { return is_axis(r, SweepAxis::radius_fixed_N); };
    figures.push_back({"fig2d", "sweep.csv from a radius_fixed_N sweep", [&] { return any(radius); }, [&] {
        csv("fig2d_giant_vs_radius.csv",
            copy_columns(out / "fig2d_giant_vs_radius.csv", rows,
                         {"radius_km", "n_nodes", "rho", "m", "m_stderr", "n_pulses", "loss_db_per_km"}, radius));
    }});
    figures.push_back({"fig3a", "sweep.csv with measured paths", [&] { return any(has_path); }, [&] {
        csv("fig3a_path_vs_n.csv", copy_columns(out / "fig3a_path_vs_n.csv", rows,
                                                {"n_nodes", "rho", "radius_km", "avg_path", "avg_path_stderr"}, has_path));
    }});
    figures.push_back({"fig3b", "sweep.csv with measured paths", [&] { return any(has_path); }, [&] {
        csv("fig3b_path_vs_rho.csv", copy_columns(out / "fig3b_path_vs_rho.csv", rows,
                                                  {"rho", "n_nodes", "radius_km", "avg_path", "avg_path_stderr"}, has_path));
    }});
    figures.push_back({"fig3c", "sweep.csv from size_fixed_radius or density sweeps", [&] { return any(clustering_rows); }, [&] {
        csv("fig3c_clustering_vs_n.csv",
            copy_columns(out / "fig3c_clustering_vs_n.csv", rows,
                         {"n_nodes", "radius_km", "rho", "avg_clustering", "avg_clustering_stderr"}, clustering_rows));
    }});
    figures.push_back({"fig3d", "sweep.csv from size_fixed_radius or density sweeps", [&] { return any(clustering_rows); }, [&] {
        csv("fig3d_clustering_vs_rho.csv",
            copy_columns(out / "fig3d_clustering_vs_rho.csv", rows,
                         {"rho", "n_nodes", "radius_km", "avg_clustering", "avg_clustering_stderr"}, clustering_rows));
    }});
    figures.push_back({"figA_mean_degree", "sweep.csv from a density_fixed_N sweep", [&] { return any(density); }, [&] {
        std::vector<std::pair<double, double>> pts;
        for (const auto& r : rows)
            if (density(r)) pts.emplace_back(r.number("rho"), r.number("mean_degree"));
        const double a = fit_mean_degree_coefficient(pts);
        CsvWriter w(out / "figA_mean_degree_vs_rho.csv",
                    {"rho", "n_nodes", "mean_degree", "mean_degree_stderr", "fit_mean_degree", "fit_A"});
        for (const auto& r : rows)
            if (density(r))
                w.row({r.text("rho"), r.text("n_nodes"), r.text("mean_degree"), r.text("mean_degree_stderr"),
                       format_double(a * r.number("rho")), format_double(a)});
        w.flush();
        csv("figA_mean_degree_vs_rho.csv", w.rows());
    }});
    figures.push_back({"figA_path_scaling", "sweep.csv with measured paths", [&] { return any(has_path); }, [&] {
        CsvWriter w(out / "figA_path_scaling.csv", {"n_nodes", "rho", "ln_n", "ln_path_times_rho"});
        for (const auto& r : rows)
            if (has_path(r))
                w.row({r.text("n_nodes"), r.text("rho"), format_double(std::log(r.number("n_nodes"))),
                       format_double(std::log(r.number("avg_path") * r.number("rho")))});
        w.flush();
        csv("figA_path_scaling.csv", w.rows());
    }});
    const std::vector<std::pair<std::string, std::vector<std::string>>> density_panels = {
        {"figA_s2_ratio", {"rho", "n_nodes", "s2_over_s1", "s2_over_s1_stderr"}},
        {"figA_binder", {"rho", "n_nodes", "binder"}},
        {"figA_susceptibility", {"rho", "n_nodes", "chi"}},
        {"figA_s_star", {"rho", "n_nodes", "s_star"}},
    };
    for (const auto& [id, cols] : density_panels) {
        figures.push_back({id, "sweep.csv from a density_fixed_N sweep", [&] { return any(density); }, [&, id = id, cols = cols] {
            csv(id + ".csv", copy_columns(out / (id + ".csv"), rows, cols, density));
        }});
    }
    auto pulses = [](const detail::SweepRow& r) { return is_axis(r, SweepAxis::pulses); };
    figures.push_back({"figA_pulses", "sweep.csv from a pulses sweep", [&] { return any(pulses); }, [&] {
        csv("figA_giant_vs_pulses.csv", copy_columns(out / "figA_giant_vs_pulses.csv", rows,
                                                     {"n_pulses", "n_nodes", "radius_km", "rho", "m", "m_stderr"}, pulses));
    }});
    figures.push_back({"figA_ns", "ns.csv", [&] { return !in.ns.empty(); }, [&] {
        CsvWriter w(out / "figA_ns.csv", {"rho", "n_nodes", "s", "n_s"});
        for (const auto& t : in.ns) {
            const std::vector<std::size_t> cols = {t.column("rho"), t.column("n_nodes"), t.column("s"), t.column("n_s")};
            for (const auto& r : t.rows) w.row({r[cols[0]], r[cols[1]], r[cols[2]], r[cols[3]]});
        }
        w.flush();
        csv("figA_ns.csv", w.rows());
    }});
    figures.push_back({"figA_collapse", "a collapse output (rescaled.csv + collapse.json)",
                       [&] { return !in.collapse_dirs.empty(); }, [&] {
        CsvWriter w(out / "figA_collapse.csv", {"form", "n_nodes", "x", "y", "dy"});
        for (const auto& dir : in.collapse_dirs) {
            std::ifstream js(dir / "collapse.json");
            const auto meta = detail::json::parse(js);
            const std::string form = meta.at("form").get<std::string>();
            const CsvTable t = read_csv(dir / "rescaled.csv");
            const std::vector<std::size_t> cols = {t.column("n_nodes"), t.column("x"), t.column("y"), t.column("dy")};
            for (const auto& r : t.rows) w.row({form, r[cols[0]], r[cols[1]], r[cols[2]], r[cols[3]]});
        }
        w.flush();
        csv("figA_collapse.csv", w.rows());
    }});

    std::set<std::string> known;
    for (const auto& f : figures) known.insert(f.id);
    for (const auto& id : only)
        if (!known.contains(id)) throw std::invalid_argument("figures: unknown figure id '" + id + "'");

    nlohmann::ordered_json missing = nlohmann::ordered_json::array();
    for (const auto& f : figures) {
        if (!only.empty() && std::find(only.begin(), only.end(), f.id) == only.end()) continue;
        if (f.available()) {
            f.write();
        } else {
            result.missing.push_back(f.id + ": needs " + f.requirement);
            missing.push_back({{"figure", f.id}, {"needs", f.requirement}});
        }
    }
    manifest.body()["input_dir"] = input_dir.generic_string();
    manifest.body()["missing"] = missing;
    manifest.write(out, result.missing.empty() ? "ok" : "partial");
    return result;
}

}  // namespace qnet::cli
