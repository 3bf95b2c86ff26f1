#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "qnet/keyed_random.hpp"
#include "qnet/model.hpp"

namespace qnet {

/// Compressed adjacency (CSR) view of a NetworkGraph; neighbor lists are
/// sorted ascending.
class Adjacency {
public:
    explicit Adjacency(const NetworkGraph& graph);

    [[nodiscard]] std::uint32_t n_nodes() const noexcept { return static_cast<std::uint32_t>(offsets_.size() - 1); }
    [[nodiscard]] std::span<const NodeId> neighbors(NodeId v) const noexcept
    {
        return {targets_.data() + offsets_[v], targets_.data() + offsets_[v + 1]};
    }
    [[nodiscard]] std::size_t degree(NodeId v) const noexcept { return offsets_[v + 1] - offsets_[v]; }

private:
    std::vector<std::size_t> offsets_;
    std::vector<NodeId> targets_;
};

struct ClusterDecomposition {
    /// Cluster id per node. Ids index `sizes`, i.e. id 0 is the largest cluster.
    std::vector<std::uint32_t> labels;
    /// Cluster sizes, descending.
    std::vector<std::uint32_t> sizes;

    [[nodiscard]] std::uint32_t s1() const noexcept { return sizes.empty() ? 0 : sizes[0]; }
    [[nodiscard]] std::uint32_t s2() const noexcept { return sizes.size() < 2 ? 0 : sizes[1]; }
};

using DegreeHistogram = std::map<std::uint32_t, std::uint64_t>;
using ClusterSizeCounts = std::map<std::uint32_t, std::uint64_t>;

struct PathStats {
    double mean_shortest_path = 0.0;
    /// Standard error of the sampled estimator; 0 when exact.
    double stderr_ = 0.0;
    std::uint64_t n_pairs_used = 0;
    bool exact = true;
};

[[nodiscard]] ClusterDecomposition connected_components(const NetworkGraph& graph);
[[nodiscard]] DegreeHistogram degree_histogram(const NetworkGraph& graph);

[[nodiscard]] double poisson_pmf(std::uint32_t k, double mean);
[[nodiscard]] double predicted_mean_degree(double rho, double coefficient);

/// C_i = 2 n_i / (k_i (k_i - 1)); zero for k_i < 2.
[[nodiscard]] double local_clustering(const Adjacency& adj, NodeId i);
[[nodiscard]] double average_clustering(const NetworkGraph& graph);

struct PathOptions {
    /// Giant clusters up to this size get all-sources BFS; larger ones use
    /// this many uniformly sampled sources.
    std::uint32_t max_exact_sources = 2000;
    unsigned threads = 1;
};

/// Mean hop distance over unordered pairs of the largest cluster.
[[nodiscard]] PathStats average_shortest_path(const NetworkGraph& graph, const PathOptions& options,
                                              const SeedSpec& seed);

[[nodiscard]] ClusterSizeCounts cluster_size_counts(const ClusterDecomposition& decomp, bool exclude_largest);

}  // namespace qnet
