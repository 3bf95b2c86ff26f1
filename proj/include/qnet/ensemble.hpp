#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qnet/metrics.hpp"
#include "qnet/model.hpp"

namespace qnet {

/// Per-realization observables, measured on one layer.
struct RealizationRecord {
    std::uint32_t n_nodes = 0;
    std::uint32_t s1 = 0;
    std::uint32_t s2 = 0;
    std::uint64_t n_edges = 0;
    DegreeHistogram degree_hist;
    double avg_clustering = 0.0;
    std::optional<PathStats> path_stats;
    ClusterSizeCounts finite_cluster_counts;

    [[nodiscard]] double mean_degree() const
    {
        return n_nodes == 0 ? 0.0 : 2.0 * static_cast<double>(n_edges) / static_cast<double>(n_nodes);
    }
};

struct RunOptions {
    bool measure_paths = false;
    Layer layer = Layer::photonic;
    std::uint32_t max_exact_sources = 2000;
    /// Worker threads; affects speed only.
    unsigned threads = 1;
};

/// Ensemble statistics at one (N, rho) point.
struct EnsemblePoint {
    std::uint32_t n_nodes = 0;
    double rho = 0.0;
    double radius_km = 0.0;
    std::uint32_t n_realizations = 0;
    double m = 0.0;
    double m_stderr = 0.0;
    double chi = 0.0;
    double binder = 0.0;
    double s2_over_s1 = 0.0;
    double s2_over_s1_stderr = 0.0;
    double mean_degree = 0.0;
    double mean_degree_stderr = 0.0;
    double avg_clustering = 0.0;
    double avg_clustering_stderr = 0.0;
    /// NaN when paths were not measured.
    double avg_path = 0.0;
    double avg_path_stderr = 0.0;
    /// Finite-cluster size distribution, per node.
    std::map<std::uint32_t, double> n_s;
    /// NaN when no finite clusters were observed.
    double s_star = 0.0;
    /// Degree counts pooled over all realizations.
    DegreeHistogram degree_counts;
};

[[nodiscard]] RealizationRecord run_realization(const ModelParams& params, const SeedSpec& seed,
                                                const RunOptions& options = {});

struct MeanWithError {
    double mean;
    double stderr_;
};

[[nodiscard]] MeanWithError order_parameter(std::span<const RealizationRecord> records);
/// Population standard deviation of the largest-cluster size (node counts).
[[nodiscard]] double susceptibility(std::span<const RealizationRecord> records);
/// 1 - <m^4> / <m^2>^2 with m = s1 / N.
[[nodiscard]] double binder_cumulant(std::span<const RealizationRecord> records);
[[nodiscard]] double s2_s1_ratio(std::span<const RealizationRecord> records);
[[nodiscard]] std::map<std::uint32_t, double> cluster_size_distribution(std::span<const RealizationRecord> records,
                                                                       std::uint32_t n_nodes);
/// sum s^2 n(s) / sum s n(s); nullopt when there are no finite clusters.
[[nodiscard]] std::optional<double> characteristic_cluster_size(const std::map<std::uint32_t, double>& n_s);

/// Aggregates records already produced for one parameter point.
[[nodiscard]] EnsemblePoint aggregate(const ModelParams& params, std::span<const RealizationRecord> records);

[[nodiscard]] EnsemblePoint run_ensemble(const ModelParams& params, std::uint32_t n_realizations,
                                         std::uint64_t base_seed, const RunOptions& options = {},
                                         std::vector<RealizationRecord>* records_out = nullptr);

enum class SweepAxis { density_fixed_N, size_fixed_rho, radius_fixed_N, size_fixed_radius, pulses, loss };

[[nodiscard]] std::string to_string(SweepAxis axis);
[[nodiscard]] SweepAxis parse_sweep_axis(const std::string& name);

/// Parameters of grid point `value` along `axis`, starting from `base`.
[[nodiscard]] ModelParams apply_sweep_value(const ModelParams& base, SweepAxis axis, double value);

/// Seed used for grid point `index` of a sweep.
[[nodiscard]] std::uint64_t sweep_point_seed(std::uint64_t base_seed, std::size_t index);

/// Called after each grid point with its index, aggregate and raw records.
using SweepObserver = std::function<void(std::size_t, const EnsemblePoint&, std::span<const RealizationRecord>)>;

[[nodiscard]] std::vector<EnsemblePoint> sweep(const ModelParams& base, SweepAxis axis, std::span<const double> grid,
                                               std::uint32_t n_realizations, std::uint64_t base_seed,
                                               const RunOptions& options = {}, const SweepObserver& observer = {});

}  // namespace qnet
