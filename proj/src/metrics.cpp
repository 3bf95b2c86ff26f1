#include "qnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qnet/parallel.hpp"

namespace qnet {

Adjacency::Adjacency(const NetworkGraph& graph) : offsets_(graph.n_nodes + 1, 0)
{
    for (const Edge& e : graph.edges) {
        ++offsets_[e.i + 1];
        ++offsets_[e.j + 1];
    }
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    targets_.resize(offsets_.back());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (const Edge& e : graph.edges) {
        targets_[fill[e.i]++] = e.j;
        targets_[fill[e.j]++] = e.i;
    }
    // Reversed (j -> i) entries arrive out of order.
    for (std::size_t v = 0; v + 1 < offsets_.size(); ++v)
        std::sort(targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[v]),
                  targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[v + 1]));
}

namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0u); }

    std::uint32_t find(std::uint32_t v)
    {
        while (parent_[v] != v) {
            parent_[v] = parent_[parent_[v]];
            v = parent_[v];
        }
        return v;
    }

    void unite(std::uint32_t a, std::uint32_t b)
    {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
    }

    [[nodiscard]] std::uint32_t size_of_root(std::uint32_t r) const { return size_[r]; }

private:
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint32_t> size_;
};

}  // namespace

ClusterDecomposition connected_components(const NetworkGraph& graph)
{
    const std::uint32_t n = graph.n_nodes;
    DisjointSets sets(n);
    for (const Edge& e : graph.edges) sets.unite(e.i, e.j);

    // Roots ordered by (size desc, smallest member asc) give stable ids.
    std::vector<std::uint32_t> root_of(n);
    std::vector<std::uint32_t> roots;
    std::vector<std::uint32_t> first_member(n, n);
    for (std::uint32_t v = 0; v < n; ++v) {
        root_of[v] = sets.find(v);
        if (first_member[root_of[v]] == n) {
            first_member[root_of[v]] = v;
            roots.push_back(root_of[v]);
        }
    }
    std::stable_sort(roots.begin(), roots.end(), [&](std::uint32_t a, std::uint32_t b) {
        return sets.size_of_root(a) > sets.size_of_root(b);
    });

    ClusterDecomposition out;
    out.sizes.reserve(roots.size());
    std::vector<std::uint32_t> id_of_root(n, 0);
    for (std::uint32_t id = 0; id < roots.size(); ++id) {
        id_of_root[roots[id]] = id;
        out.sizes.push_back(sets.size_of_root(roots[id]));
    }
    out.labels.resize(n);
    for (std::uint32_t v = 0; v < n; ++v) out.labels[v] = id_of_root[root_of[v]];
    return out;
}

DegreeHistogram degree_histogram(const NetworkGraph& graph)
{
    std::vector<std::uint32_t> deg(graph.n_nodes, 0);
    for (const Edge& e : graph.edges) {
        ++deg[e.i];
        ++deg[e.j];
    }
    DegreeHistogram out;
    for (std::uint32_t d : deg) ++out[d];
    return out;
}

double poisson_pmf(std::uint32_t k, double mean)
{
    if (!(mean >= 0.0)) throw std::domain_error("poisson_pmf: mean must be non-negative");
    if (mean == 0.0) return k == 0 ? 1.0 : 0.0;
    const double kd = static_cast<double>(k);
    return std::exp(kd * std::log(mean) - mean - std::lgamma(kd + 1.0));
}

double predicted_mean_degree(double rho, double coefficient)
{
    if (!(rho >= 0.0)) throw std::domain_error("predicted_mean_degree: rho must be non-negative");
    return coefficient * rho;
}

double local_clustering(const Adjacency& adj, NodeId i)
{
    if (i >= adj.n_nodes()) throw std::out_of_range("local_clustering: node out of range");
    const auto nbrs = adj.neighbors(i);
    const std::size_t k = nbrs.size();
    if (k < 2) return 0.0;
    std::size_t links = 0;
    for (NodeId u : nbrs) {
        // count w > u among u's neighbors that are also neighbors of i
        for (NodeId w : adj.neighbors(u))
            if (w > u && std::binary_search(nbrs.begin(), nbrs.end(), w)) ++links;
    }
    return 2.0 * static_cast<double>(links) / (static_cast<double>(k) * static_cast<double>(k - 1));
}

double average_clustering(const NetworkGraph& graph)
{
    if (graph.n_nodes == 0) return 0.0;
    const Adjacency adj(graph);
    double total = 0.0;
    for (NodeId v = 0; v < graph.n_nodes; ++v) total += local_clustering(adj, v);
    return total / static_cast<double>(graph.n_nodes);
}

namespace {

// Sum of hop distances from `source` to every node it reaches.
std::uint64_t bfs_distance_sum(const Adjacency& adj, NodeId source, std::vector<std::int32_t>& dist,
                               std::vector<NodeId>& queue)
{
    std::fill(dist.begin(), dist.end(), -1);
    queue.clear();
    queue.push_back(source);
    dist[source] = 0;
    std::uint64_t sum = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const NodeId v = queue[head];
        const std::int32_t next = dist[v] + 1;
        for (NodeId w : adj.neighbors(v)) {
            if (dist[w] < 0) {
                dist[w] = next;
                sum += static_cast<std::uint64_t>(next);
                queue.push_back(w);
            }
        }
    }
    return sum;
}

}  // namespace

PathStats average_shortest_path(const NetworkGraph& graph, const PathOptions& options, const SeedSpec& seed)
{
    const ClusterDecomposition decomp = connected_components(graph);
    const std::uint32_t giant = decomp.s1();
    if (giant < 2) throw std::domain_error("average_shortest_path: giant cluster has fewer than 2 nodes");

    std::vector<NodeId> members;
    members.reserve(giant);
    for (NodeId v = 0; v < graph.n_nodes; ++v)
        if (decomp.labels[v] == 0) members.push_back(v);

    const bool exact = giant <= options.max_exact_sources;
    std::vector<NodeId> sources = members;
    if (!exact) {
        // Partial Fisher-Yates with keyed draws: uniform sample without replacement.
        const std::uint32_t m = std::max<std::uint32_t>(options.max_exact_sources, 2);
        for (std::uint32_t k = 0; k < m; ++k) {
            const double u = keyed_uniforms(seed, RandomTag::path_sources, k, 0).first;
            const auto pick = k + static_cast<std::uint32_t>(u * static_cast<double>(giant - k));
            std::swap(sources[k], sources[std::min(pick, giant - 1)]);
        }
        sources.resize(m);
    }

    const Adjacency adj(graph);
    std::vector<std::uint64_t> sums(sources.size(), 0);
    parallel_for(sources.size(), options.threads, [&](std::size_t k) {
        thread_local std::vector<std::int32_t> dist;
        thread_local std::vector<NodeId> queue;
        dist.resize(adj.n_nodes());
        sums[k] = bfs_distance_sum(adj, sources[k], dist, queue);
    });

    PathStats out;
    out.exact = exact;
    const double others = static_cast<double>(giant - 1);
    if (exact) {
        const std::uint64_t total = std::accumulate(sums.begin(), sums.end(), std::uint64_t{0});
        out.mean_shortest_path = static_cast<double>(total) / (static_cast<double>(giant) * others);
        out.n_pairs_used = static_cast<std::uint64_t>(giant) * (giant - 1) / 2;
        out.stderr_ = 0.0;
        return out;
    }
    const double m = static_cast<double>(sources.size());
    double mean = 0.0;
    for (std::uint64_t s : sums) mean += static_cast<double>(s) / others;
    mean /= m;
    double var = 0.0;
    for (std::uint64_t s : sums) {
        const double d = static_cast<double>(s) / others - mean;
        var += d * d;
    }
    var /= (m - 1.0);
    const double fpc = 1.0 - m / static_cast<double>(giant);
    out.mean_shortest_path = mean;
    out.stderr_ = std::sqrt(var / m * fpc);
    out.n_pairs_used = static_cast<std::uint64_t>(sources.size()) * (giant - 1);
    return out;
}

ClusterSizeCounts cluster_size_counts(const ClusterDecomposition& decomp, bool exclude_largest)
{
    ClusterSizeCounts out;
    const std::size_t skip = exclude_largest && !decomp.sizes.empty() ? 1 : 0;
    for (std::size_t c = skip; c < decomp.sizes.size(); ++c) ++out[decomp.sizes[c]];
    return out;
}

}  // namespace qnet
