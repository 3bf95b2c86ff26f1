#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qnet/keyed_random.hpp"

namespace qnet {

using NodeId = std::uint32_t;

/// Physical and sampling parameters of one scenario. Defaults reproduce the
/// US fiber network constants (alpha*L = 226 km, beta = 1), silica loss at
/// 1550 nm and 1000 pulses per attempted link.
struct ModelParams {
    double radius_km = 1800.0;
    std::uint32_t n_nodes = 1000;
    double waxman_beta = 1.0;
    double waxman_scale_km = 226.0;
    double loss_db_per_km = 0.2;
    std::uint32_t n_pulses = 1000;
    double cutoff_epsilon = 1e-12;
    /// Model variant: attempt photon transmission on every pair instead of
    /// only on fiber edges.
    bool photonic_on_all_pairs = false;

    /// Throws std::invalid_argument naming the first violated invariant.
    void validate() const;

    [[nodiscard]] double density() const;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Nodes per km^2 for N nodes in a disk of the given radius.
[[nodiscard]] double density(const ModelParams& params);
[[nodiscard]] double radius_for_density(std::uint32_t n_nodes, double rho);

struct Point {
    double x_km;
    double y_km;
};

struct NodePositions {
    std::vector<Point> coords;
};

[[nodiscard]] double distance_km(const Point& a, const Point& b) noexcept;

// Link laws.
[[nodiscard]] double fiber_link_prob(double d_km, const ModelParams& params);
[[nodiscard]] double transmissivity(double d_km, double loss_db_per_km);
[[nodiscard]] double photonic_link_prob(double p, std::uint32_t n_pulses);
[[nodiscard]] double combined_link_prob(double d_km, const ModelParams& params);

/// Largest distance at which a pair can still produce a photonic edge with
/// probability >= cutoff_epsilon. +infinity when cutoff_epsilon == 0.
[[nodiscard]] double interaction_cutoff(const ModelParams& params);

enum class Layer { fiber, photonic };

struct Edge {
    NodeId i;
    NodeId j;

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Undirected simple graph; edges are stored with i < j in ascending order.
struct NetworkGraph {
    std::uint32_t n_nodes = 0;
    std::vector<Edge> edges;
    Layer layer = Layer::photonic;

    friend bool operator==(const NetworkGraph&, const NetworkGraph&) = default;
};

struct Realization {
    NetworkGraph fiber;
    NetworkGraph photonic;

    friend bool operator==(const Realization&, const Realization&) = default;
};

[[nodiscard]] NodePositions sample_node_positions(const ModelParams& params, const SeedSpec& seed);

/// Decision for one candidate pair, drawn from the pair's keyed uniforms.
struct PairOutcome {
    bool fiber;
    bool photonic;
};
[[nodiscard]] PairOutcome decide_pair(NodeId i, NodeId j, double d_km, const ModelParams& params,
                                      const SeedSpec& seed);

/// Grid-accelerated generator. Candidate pairs come from a uniform cell grid
/// of cell size interaction_cutoff(params); output does not depend on
/// `threads`.
[[nodiscard]] Realization generate_realization(std::span<const Point> positions,
                                               const ModelParams& params, const SeedSpec& seed,
                                               unsigned threads = 1);

/// Brute-force all-pairs generator, kept as a reference for the grid path.
[[nodiscard]] Realization generate_realization_naive(std::span<const Point> positions,
                                                     const ModelParams& params,
                                                     const SeedSpec& seed);

}  // namespace qnet
