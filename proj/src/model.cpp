#include "qnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qnet/parallel.hpp"

namespace qnet {

namespace {

void require(bool ok, const char* what)
{
    if (!ok) throw std::invalid_argument(std::string("invalid model parameters: ") + what);
}

void require_distance(double d_km)
{
    if (!(d_km >= 0.0)) throw std::domain_error("distance must be non-negative, got " + std::to_string(d_km));
}

// Probability that a pair at distance d ends up with a photonic edge under the
// active model variant. Drives the interaction cutoff.
double photonic_edge_prob(double d_km, const ModelParams& params)
{
    const double pulse = photonic_link_prob(transmissivity(d_km, params.loss_db_per_km), params.n_pulses);
    return params.photonic_on_all_pairs ? pulse : fiber_link_prob(d_km, params) * pulse;
}

}  // namespace

void ModelParams::validate() const
{
    require(radius_km > 0.0 && std::isfinite(radius_km), "radius_km must be positive and finite");
    require(n_nodes >= 1, "n_nodes must be >= 1");
    require(waxman_beta > 0.0 && waxman_beta <= 1.0, "waxman_beta must lie in (0, 1]");
    require(waxman_scale_km > 0.0, "waxman_scale_km must be positive");
    require(loss_db_per_km > 0.0 && std::isfinite(loss_db_per_km), "loss_db_per_km must be positive");
    require(n_pulses >= 1, "n_pulses must be >= 1");
    require(cutoff_epsilon >= 0.0 && cutoff_epsilon < 1.0, "cutoff_epsilon must lie in [0, 1)");
    const double rho = density();
    require(std::isfinite(rho) && rho > 0.0, "density must be finite and positive");
}

double ModelParams::density() const
{
    return static_cast<double>(n_nodes) / (std::numbers::pi * radius_km * radius_km);
}

double density(const ModelParams& params) { return params.density(); }

double radius_for_density(std::uint32_t n_nodes, double rho)
{
    if (n_nodes < 1) throw std::invalid_argument("radius_for_density: n_nodes must be >= 1");
    if (!(rho > 0.0) || !std::isfinite(rho)) throw std::invalid_argument("radius_for_density: rho must be positive");
    return std::sqrt(static_cast<double>(n_nodes) / (std::numbers::pi * rho));
}

double distance_km(const Point& a, const Point& b) noexcept
{
    const double dx = a.x_km - b.x_km;
    const double dy = a.y_km - b.y_km;
    return std::sqrt(dx * dx + dy * dy);
}

double fiber_link_prob(double d_km, const ModelParams& params)
{
    require_distance(d_km);
    return params.waxman_beta * std::exp(-d_km / params.waxman_scale_km);
}

double transmissivity(double d_km, double loss_db_per_km)
{
    require_distance(d_km);
    if (!(loss_db_per_km > 0.0)) throw std::domain_error("loss must be positive");
    return std::pow(10.0, -loss_db_per_km * d_km / 10.0);
}

double photonic_link_prob(double p, std::uint32_t n_pulses)
{
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("transmissivity must lie in [0, 1], got " + std::to_string(p));
    if (n_pulses < 1) throw std::domain_error("n_pulses must be >= 1");
    // 1 - (1-p)^n without cancellation for small p.
    return -std::expm1(static_cast<double>(n_pulses) * std::log1p(-p));
}

double combined_link_prob(double d_km, const ModelParams& params)
{
    return fiber_link_prob(d_km, params) *
           photonic_link_prob(transmissivity(d_km, params.loss_db_per_km), params.n_pulses);
}

double interaction_cutoff(const ModelParams& params)
{
    const double eps = params.cutoff_epsilon;
    if (eps == 0.0) return std::numeric_limits<double>::infinity();
    if (photonic_edge_prob(0.0, params) < eps) return 0.0;

    double lo = 0.0;
    double hi = 1.0;
    while (photonic_edge_prob(hi, params) >= eps) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) return std::numeric_limits<double>::infinity();
    }
    // Invariant: prob(lo) >= eps > prob(hi).
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (photonic_edge_prob(mid, params) >= eps)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

NodePositions sample_node_positions(const ModelParams& params, const SeedSpec& seed)
{
    params.validate();
    NodePositions out;
    out.coords.reserve(params.n_nodes);
    const double r2max = params.radius_km * params.radius_km;
    for (NodeId i = 0; i < params.n_nodes; ++i) {
        const auto [u_radius, u_angle] = keyed_uniforms(seed, RandomTag::node_position, i, 0);
        const double r = params.radius_km * std::sqrt(u_radius);
        const double theta = 2.0 * std::numbers::pi * u_angle;
        Point p{r * std::cos(theta), r * std::sin(theta)};
        if (p.x_km * p.x_km + p.y_km * p.y_km > r2max) {
            // rounding at r == R
            p.x_km *= 1.0 - 1e-15;
            p.y_km *= 1.0 - 1e-15;
        }
        out.coords.push_back(p);
    }
    return out;
}

PairOutcome decide_pair(NodeId i, NodeId j, double d_km, const ModelParams& params, const SeedSpec& seed)
{
    const auto [u_fiber, u_photon] = keyed_uniforms(seed, RandomTag::pair_link, std::min(i, j), std::max(i, j));
    const bool fiber = u_fiber < fiber_link_prob(d_km, params);
    if (!fiber && !params.photonic_on_all_pairs) return {false, false};
    const double pulse = photonic_link_prob(transmissivity(d_km, params.loss_db_per_km), params.n_pulses);
    return {fiber, u_photon < pulse};
}

namespace {

struct EdgeBuffers {
    std::vector<Edge> fiber;
    std::vector<Edge> photonic;

    void consider(NodeId a, NodeId b, const Point& pa, const Point& pb, double d_max, const ModelParams& params,
                  const SeedSpec& seed)
    {
        const double dx = pa.x_km - pb.x_km;
        const double dy = pa.y_km - pb.y_km;
        const double d2 = dx * dx + dy * dy;
        if (!(d2 <= d_max * d_max)) return;
        const double d = std::sqrt(d2);
        const NodeId i = std::min(a, b);
        const NodeId j = std::max(a, b);
        const PairOutcome o = decide_pair(i, j, d, params, seed);
        if (o.fiber) fiber.push_back({i, j});
        if (o.photonic) photonic.push_back({i, j});
    }
};

Realization assemble(std::uint32_t n_nodes, std::vector<EdgeBuffers>& parts)
{
    Realization out;
    out.fiber = {n_nodes, {}, Layer::fiber};
    out.photonic = {n_nodes, {}, Layer::photonic};
    for (auto& p : parts) {
        out.fiber.edges.insert(out.fiber.edges.end(), p.fiber.begin(), p.fiber.end());
        out.photonic.edges.insert(out.photonic.edges.end(), p.photonic.begin(), p.photonic.end());
    }
    std::sort(out.fiber.edges.begin(), out.fiber.edges.end());
    std::sort(out.photonic.edges.begin(), out.photonic.edges.end());
    return out;
}

void check_inputs(std::span<const Point> positions, const ModelParams& params)
{
    params.validate();
    if (positions.size() != params.n_nodes)
        throw std::invalid_argument("positions do not match n_nodes");
}

}  // namespace

Realization generate_realization(std::span<const Point> positions, const ModelParams& params,
                                 const SeedSpec& seed, unsigned threads)
{
    check_inputs(positions, params);
    const double d_max = interaction_cutoff(params);
    const double span = 2.0 * params.radius_km;

    // Cells are at least d_max wide, so only the 3x3 neighborhood can hold
    // partners. The cap keeps memory proportional to N for tiny cutoffs.
    const auto n = static_cast<std::size_t>(positions.size());
    const std::size_t cap = 2 * static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n)))) + 1;
    std::size_t cells = 1;
    if (std::isfinite(d_max) && d_max > 0.0) cells = static_cast<std::size_t>(std::clamp(std::floor(span / d_max), 1.0, static_cast<double>(cap)));
    else if (d_max == 0.0) cells = cap;
    const double cell_size = span / static_cast<double>(cells);

    auto cell_of = [&](const Point& p) {
        auto coord = [&](double v) {
            const auto c = static_cast<std::ptrdiff_t>(std::floor((v + params.radius_km) / cell_size));
            return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(c, 0, static_cast<std::ptrdiff_t>(cells) - 1));
        };
        return coord(p.x_km) * cells + coord(p.y_km);
    };

    // Counting sort into cells; members of a cell stay in index order.
    std::vector<std::size_t> start(cells * cells + 1, 0);
    std::vector<std::size_t> home(n);
    for (std::size_t k = 0; k < n; ++k) {
        home[k] = cell_of(positions[k]);
        ++start[home[k] + 1];
    }
    for (std::size_t c = 0; c < cells * cells; ++c) start[c + 1] += start[c];
    std::vector<NodeId> members(n);
    {
        std::vector<std::size_t> fill(start.begin(), start.end() - 1);
        for (std::size_t k = 0; k < n; ++k) members[fill[home[k]]++] = static_cast<NodeId>(k);
    }

    auto pair_cells = [&](std::size_t ca, std::size_t cb, EdgeBuffers& buf) {
        for (std::size_t a = start[ca]; a < start[ca + 1]; ++a) {
            const NodeId u = members[a];
            const std::size_t b0 = ca == cb ? a + 1 : start[cb];
            for (std::size_t b = b0; b < start[cb + 1]; ++b) {
                const NodeId v = members[b];
                buf.consider(u, v, positions[u], positions[v], d_max, params, seed);
            }
        }
    };

    std::vector<EdgeBuffers> rows(cells);
    parallel_for(cells, threads, [&](std::size_t cx) {
        EdgeBuffers& buf = rows[cx];
        for (std::size_t cy = 0; cy < cells; ++cy) {
            const std::size_t c = cx * cells + cy;
            pair_cells(c, c, buf);
            if (cy + 1 < cells) pair_cells(c, c + 1, buf);
            if (cx + 1 < cells) {
                const std::size_t right = (cx + 1) * cells + cy;
                pair_cells(c, right, buf);
                if (cy > 0) pair_cells(c, right - 1, buf);
                if (cy + 1 < cells) pair_cells(c, right + 1, buf);
            }
        }
    });
    return assemble(params.n_nodes, rows);
}

Realization generate_realization_naive(std::span<const Point> positions, const ModelParams& params,
                                       const SeedSpec& seed)
{
    check_inputs(positions, params);
    const double d_max = interaction_cutoff(params);
    std::vector<EdgeBuffers> one(1);
    for (NodeId i = 0; i < params.n_nodes; ++i)
        for (NodeId j = i + 1; j < params.n_nodes; ++j)
            one[0].consider(i, j, positions[i], positions[j], d_max, params, seed);
    return assemble(params.n_nodes, one);
}

}  // namespace qnet
