#include "qnet/ensemble.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "qnet/parallel.hpp"

namespace qnet {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double giant_fraction(const RealizationRecord& r) { return static_cast<double>(r.s1) / static_cast<double>(r.n_nodes); }

template <class F>
MeanWithError mean_and_stderr(std::span<const RealizationRecord> records, F value)
{
    const double n = static_cast<double>(records.size());
    double sum = 0.0;
    for (const auto& r : records) sum += value(r);
    const double mean = sum / n;
    if (records.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (const auto& r : records) {
        const double d = value(r) - mean;
        ss += d * d;
    }
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

void require_records(std::span<const RealizationRecord> records, std::size_t min, const char* what)
{
    if (records.size() < min)
        throw std::invalid_argument(std::string(what) + ": needs at least " + std::to_string(min) + " record(s)");
}

}  // namespace

RealizationRecord run_realization(const ModelParams& params, const SeedSpec& seed, const RunOptions& options)
{
    const NodePositions pos = sample_node_positions(params, seed);
    const Realization graphs = generate_realization(pos.coords, params, seed, options.threads);
    const NetworkGraph& g = options.layer == Layer::fiber ? graphs.fiber : graphs.photonic;

    RealizationRecord rec;
    rec.n_nodes = g.n_nodes;
    rec.n_edges = g.edges.size();
    const ClusterDecomposition decomp = connected_components(g);
    rec.s1 = decomp.s1();
    rec.s2 = decomp.s2();
    rec.degree_hist = degree_histogram(g);
    rec.avg_clustering = average_clustering(g);
    rec.finite_cluster_counts = cluster_size_counts(decomp, true);
    if (options.measure_paths && rec.s1 >= 2)
        rec.path_stats = average_shortest_path(g, {options.max_exact_sources, options.threads}, seed);
    return rec;
}

MeanWithError order_parameter(std::span<const RealizationRecord> records)
{
    require_records(records, 1, "order_parameter");
    return mean_and_stderr(records, giant_fraction);
}

double susceptibility(std::span<const RealizationRecord> records)
{
    require_records(records, 2, "susceptibility");
    const double n = static_cast<double>(records.size());
    double mean = 0.0;
    for (const auto& r : records) mean += r.s1;
    mean /= n;
    double var = 0.0;
    for (const auto& r : records) {
        const double d = r.s1 - mean;
        var += d * d;
    }
    return std::sqrt(var / n);
}

double binder_cumulant(std::span<const RealizationRecord> records)
{
    require_records(records, 1, "binder_cumulant");
    double m2 = 0.0;
    double m4 = 0.0;
    for (const auto& r : records) {
        const double m = giant_fraction(r);
        m2 += m * m;
        m4 += m * m * m * m;
    }
    const double n = static_cast<double>(records.size());
    m2 /= n;
    m4 /= n;
    if (m2 == 0.0) throw std::domain_error("binder_cumulant: <m^2> is zero");
    return 1.0 - m4 / (m2 * m2);
}

double s2_s1_ratio(std::span<const RealizationRecord> records)
{
    require_records(records, 1, "s2_s1_ratio");
    double sum = 0.0;
    for (const auto& r : records) {
        if (r.s1 == 0) throw std::domain_error("s2_s1_ratio: record with empty largest cluster");
        sum += static_cast<double>(r.s2) / static_cast<double>(r.s1);
    }
    return sum / static_cast<double>(records.size());
}

std::map<std::uint32_t, double> cluster_size_distribution(std::span<const RealizationRecord> records,
                                                         std::uint32_t n_nodes)
{
    require_records(records, 1, "cluster_size_distribution");
    std::map<std::uint32_t, std::uint64_t> counts;
    for (const auto& r : records)
        for (const auto& [s, c] : r.finite_cluster_counts) counts[s] += c;
    const double norm = static_cast<double>(records.size()) * static_cast<double>(n_nodes);
    std::map<std::uint32_t, double> out;
    for (const auto& [s, c] : counts) out[s] = static_cast<double>(c) / norm;
    return out;
}

std::optional<double> characteristic_cluster_size(const std::map<std::uint32_t, double>& n_s)
{
    double first = 0.0;
    double second = 0.0;
    for (const auto& [s, n] : n_s) {
        first += s * n;
        second += static_cast<double>(s) * s * n;
    }
    if (!(first > 0.0)) return std::nullopt;
    return second / first;
}

EnsemblePoint aggregate(const ModelParams& params, std::span<const RealizationRecord> records)
{
    require_records(records, 1, "aggregate");
    EnsemblePoint p;
    p.n_nodes = params.n_nodes;
    p.rho = params.density();
    p.radius_km = params.radius_km;
    p.n_realizations = static_cast<std::uint32_t>(records.size());

    const auto m = order_parameter(records);
    p.m = m.mean;
    p.m_stderr = m.stderr_;
    p.chi = records.size() >= 2 ? susceptibility(records) : 0.0;
    p.binder = binder_cumulant(records);
    const auto ratio = mean_and_stderr(records, [](const RealizationRecord& r) {
        return static_cast<double>(r.s2) / static_cast<double>(r.s1);
    });
    p.s2_over_s1 = ratio.mean;
    p.s2_over_s1_stderr = ratio.stderr_;
    const auto deg = mean_and_stderr(records, [](const RealizationRecord& r) { return r.mean_degree(); });
    p.mean_degree = deg.mean;
    p.mean_degree_stderr = deg.stderr_;
    const auto clust = mean_and_stderr(records, [](const RealizationRecord& r) { return r.avg_clustering; });
    p.avg_clustering = clust.mean;
    p.avg_clustering_stderr = clust.stderr_;

    std::vector<double> paths;
    for (const auto& r : records)
        if (r.path_stats) paths.push_back(r.path_stats->mean_shortest_path);
    if (paths.empty()) {
        p.avg_path = kNaN;
        p.avg_path_stderr = kNaN;
    } else {
        const double n = static_cast<double>(paths.size());
        double sum = 0.0;
        for (double v : paths) sum += v;
        p.avg_path = sum / n;
        double ss = 0.0;
        for (double v : paths) ss += (v - p.avg_path) * (v - p.avg_path);
        p.avg_path_stderr = paths.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    }

    p.n_s = cluster_size_distribution(records, params.n_nodes);
    p.s_star = characteristic_cluster_size(p.n_s).value_or(kNaN);
    for (const auto& r : records)
        for (const auto& [k, c] : r.degree_hist) p.degree_counts[k] += c;
    return p;
}

EnsemblePoint run_ensemble(const ModelParams& params, std::uint32_t n_realizations, std::uint64_t base_seed,
                           const RunOptions& options, std::vector<RealizationRecord>* records_out)
{
    params.validate();
    if (n_realizations < 1) throw std::invalid_argument("run_ensemble: n_realizations must be >= 1");
    std::vector<RealizationRecord> records(n_realizations);
    RunOptions inner = options;
    inner.threads = 1;
    parallel_for(n_realizations, options.threads, [&](std::size_t k) {
        records[k] = run_realization(params, {base_seed, k}, inner);
    });
    EnsemblePoint point = aggregate(params, records);
    if (records_out) *records_out = std::move(records);
    return point;
}

std::string to_string(SweepAxis axis)
{
    switch (axis) {
    case SweepAxis::density_fixed_N: return "density_fixed_N";
    case SweepAxis::size_fixed_rho: return "size_fixed_rho";
    case SweepAxis::radius_fixed_N: return "radius_fixed_N";
    case SweepAxis::size_fixed_radius: return "size_fixed_radius";
    case SweepAxis::pulses: return "pulses";
    case SweepAxis::loss: return "loss";
    }
    return "unknown";
}

SweepAxis parse_sweep_axis(const std::string& name)
{
    for (SweepAxis a : {SweepAxis::density_fixed_N, SweepAxis::size_fixed_rho, SweepAxis::radius_fixed_N,
                        SweepAxis::size_fixed_radius, SweepAxis::pulses, SweepAxis::loss})
        if (to_string(a) == name) return a;
    throw std::invalid_argument("unknown sweep axis '" + name + "'");
}

namespace {

std::uint32_t as_count(double value, const char* what)
{
    if (!(value >= 1.0) || value != std::floor(value) || value > 4294967295.0)
        throw std::invalid_argument(std::string("sweep grid value for ") + what + " must be a positive integer, got " +
                                    std::to_string(value));
    return static_cast<std::uint32_t>(value);
}

}  // namespace

ModelParams apply_sweep_value(const ModelParams& base, SweepAxis axis, double value)
{
    ModelParams p = base;
    switch (axis) {
    case SweepAxis::density_fixed_N: p.radius_km = radius_for_density(base.n_nodes, value); break;
    case SweepAxis::size_fixed_rho:
        p.n_nodes = as_count(value, "n_nodes");
        p.radius_km = radius_for_density(p.n_nodes, base.density());
        break;
    case SweepAxis::radius_fixed_N: p.radius_km = value; break;
    case SweepAxis::size_fixed_radius: p.n_nodes = as_count(value, "n_nodes"); break;
    case SweepAxis::pulses: p.n_pulses = as_count(value, "n_pulses"); break;
    case SweepAxis::loss: p.loss_db_per_km = value; break;
    }
    p.validate();
    return p;
}

std::uint64_t sweep_point_seed(std::uint64_t base_seed, std::size_t index) { return derive_seed(base_seed, index); }

std::vector<EnsemblePoint> sweep(const ModelParams& base, SweepAxis axis, std::span<const double> grid,
                                 std::uint32_t n_realizations, std::uint64_t base_seed, const RunOptions& options,
                                 const SweepObserver& observer)
{
    if (grid.empty()) throw std::invalid_argument("sweep: empty grid");
    std::vector<ModelParams> points;
    points.reserve(grid.size());
    for (double v : grid) points.push_back(apply_sweep_value(base, axis, v));
    std::vector<EnsemblePoint> out;
    out.reserve(grid.size());
    std::vector<RealizationRecord> records;
    for (std::size_t k = 0; k < points.size(); ++k) {
        out.push_back(run_ensemble(points[k], n_realizations, sweep_point_seed(base_seed, k), options, &records));
        if (observer) observer(k, out.back(), records);
    }
    return out;
}

}  // namespace qnet
