#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

#include "qnet/keyed_random.hpp"
#include "qnet/model.hpp"

using namespace qnet;

namespace {

constexpr double kPi = 3.14159265358979323846;

ModelParams defaults() { return ModelParams{}; }

ModelParams small_disk(std::uint32_t n, double radius)
{
    ModelParams p;
    p.n_nodes = n;
    p.radius_km = radius;
    return p;
}

}  // namespace

TEST_CASE("philox4x32-10 known-answer vectors")
{
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == PhiloxBlock{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          PhiloxBlock{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          PhiloxBlock{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("keyed uniforms depend only on their key")
{
    const SeedSpec s{42, 7};
    const auto a = keyed_uniforms(s, RandomTag::pair_link, 3, 9);
    const auto b = keyed_uniforms(s, RandomTag::pair_link, 3, 9);
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
    CHECK(keyed_uniforms(s, RandomTag::node_position, 3, 9).first != a.first);
    CHECK(keyed_uniforms({42, 8}, RandomTag::pair_link, 3, 9).first != a.first);
    CHECK(keyed_uniforms({43, 7}, RandomTag::pair_link, 3, 9).first != a.first);
    CHECK(a.first >= 0.0);
    CHECK(a.first < 1.0);
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("density and radius_for_density")
{
    CHECK(density(small_disk(1000, 1800)) == doctest::Approx(1000.0 / (kPi * 1800.0 * 1800.0)).epsilon(1e-14));
    CHECK(density(small_disk(1000, 1800)) == doctest::Approx(9.82e-5).epsilon(1e-3));
    CHECK(density(small_disk(1, 10)) == doctest::Approx(1.0 / (kPi * 100.0)).epsilon(1e-14));
    CHECK(density(small_disk(694, 1800)) == doctest::Approx(6.82e-5).epsilon(1e-3));
    CHECK(radius_for_density(1000, 9.82e-5) == doctest::Approx(1800.0).epsilon(1e-3));
    CHECK(radius_for_density(1, 1.0 / kPi) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(radius_for_density(10000, 6.82e-5) == doctest::Approx(6832.0).epsilon(1e-3));
    CHECK_THROWS_AS((void)radius_for_density(10, 0.0), std::invalid_argument);
    CHECK_THROWS_AS((void)radius_for_density(10, -1.0), std::invalid_argument);
}

TEST_CASE("parameter validation")
{
    CHECK_NOTHROW(defaults().validate());
    auto bad = [](auto mutate) {
        ModelParams p;
        mutate(p);
        return p;
    };
    CHECK_THROWS_AS(bad([](ModelParams& p) { p.radius_km = 0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](ModelParams& p) { p.n_nodes = 0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](ModelParams& p) { p.waxman_beta = 0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](ModelParams& p) { p.waxman_beta = 1.5; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](ModelParams& p) { p.waxman_scale_km = 0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](ModelParams& p) { p.loss_db_per_km = 0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](ModelParams& p) { p.n_pulses = 0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](ModelParams& p) { p.cutoff_epsilon = 1.0; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](ModelParams& p) { p.cutoff_epsilon = -0.1; }).validate(), std::invalid_argument);
}

TEST_CASE("node positions")
{
    SUBCASE("single node lies inside the disk")
    {
        const auto pos = sample_node_positions(small_disk(1, 50), {3, 0});
        REQUIRE(pos.coords.size() == 1);
        CHECK(std::hypot(pos.coords[0].x_km, pos.coords[0].y_km) <= 50.0);
    }
    SUBCASE("containment, mean radius 2R/3 and determinism")
    {
        const ModelParams p = small_disk(200000, 1000);
        const auto a = sample_node_positions(p, {11, 2});
        double sum_r = 0.0;
        for (const auto& q : a.coords) {
            const double r2 = q.x_km * q.x_km + q.y_km * q.y_km;
            REQUIRE(r2 <= 1000.0 * 1000.0);
            sum_r += std::sqrt(r2);
        }
        // sd of r is R/sqrt(18); 5 standard errors.
        const double tol = 5.0 * 1000.0 / std::sqrt(18.0) / std::sqrt(200000.0);
        CHECK(std::abs(sum_r / 200000.0 - 2000.0 / 3.0) < tol);
        const auto b = sample_node_positions(p, {11, 2});
        bool same = true;
        for (std::size_t k = 0; k < a.coords.size(); ++k)
            same = same && a.coords[k].x_km == b.coords[k].x_km && a.coords[k].y_km == b.coords[k].y_km;
        CHECK(same);
    }
}

TEST_CASE("link law examples")
{
    ModelParams p;
    CHECK(fiber_link_prob(0.0, p) == 1.0);
    CHECK(fiber_link_prob(226.0, p) == doctest::Approx(0.3678794411714423216).epsilon(1e-14));
    ModelParams half;
    half.waxman_beta = 0.5;
    CHECK(fiber_link_prob(0.0, half) == 0.5);

    CHECK(transmissivity(0.0, 0.2) == 1.0);
    CHECK(std::abs(transmissivity(50.0, 0.2) - 0.1) < 1e-15);
    CHECK(transmissivity(100.0, 0.095) == doctest::Approx(0.11220184543019634356).epsilon(1e-14));

    CHECK(photonic_link_prob(0.1, 1) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(photonic_link_prob(0.0, 1000) == 0.0);
    CHECK(std::abs(photonic_link_prob(0.001, 1000) - 0.63230457522903595537) < 1e-12);
    CHECK(std::abs(photonic_link_prob(0.01, 1000) - 0.99995682875258934175) < 1e-12);
    // Small-p regime where 1 - (1-p)^n loses all digits.
    CHECK(photonic_link_prob(1e-12, 1000) == doctest::Approx(9.9999999950050000017e-10).epsilon(1e-12));
    CHECK(photonic_link_prob(1.0, 3) == 1.0);

    CHECK(combined_link_prob(0.0, p) == 1.0);
    CHECK(std::abs(combined_link_prob(226.0, p) - 0.010943865295518679554) < 1e-12);
    CHECK(combined_link_prob(100.0, p) == doctest::Approx(0.6424148190952848265).epsilon(1e-12));
    CHECK(combined_link_prob(500.0, p) == doctest::Approx(1.0943883935412508007e-8).epsilon(1e-10));
    CHECK(combined_link_prob(300.0, p) < combined_link_prob(150.0, p));
}

TEST_CASE("link law domain errors")
{
    ModelParams p;
    CHECK_THROWS_AS((void)fiber_link_prob(-1.0, p), std::domain_error);
    CHECK_THROWS_AS((void)transmissivity(-1.0, 0.2), std::domain_error);
    CHECK_THROWS_AS((void)photonic_link_prob(-0.1, 10), std::domain_error);
    CHECK_THROWS_AS((void)photonic_link_prob(1.1, 10), std::domain_error);
    CHECK_THROWS_AS((void)combined_link_prob(-5.0, p), std::domain_error);
}

TEST_CASE("link laws are monotone on grids")
{
    ModelParams p;
    for (double gamma : {0.095, 0.13, 0.2, 0.5}) {
        p.loss_db_per_km = gamma;
        double prev_f = 2.0, prev_t = 2.0, prev_c = 2.0;
        for (double d = 0.0; d <= 600.0; d += 2.5) {
            const double f = fiber_link_prob(d, p);
            const double t = transmissivity(d, gamma);
            const double c = combined_link_prob(d, p);
            CHECK(f < prev_f);
            CHECK(t < prev_t);
            CHECK(c < prev_c);
            CHECK(c >= 0.0);
            CHECK(c <= 1.0);
            prev_f = f;
            prev_t = t;
            prev_c = c;
        }
    }
    for (double q : {1e-9, 1e-6, 1e-3, 0.1, 0.5}) {
        double prev = -1.0;
        for (std::uint32_t n : {1u, 2u, 10u, 100u, 1000u, 10000u}) {
            const double v = photonic_link_prob(q, n);
            CHECK(v >= prev);
            prev = v;
        }
    }
    for (std::uint32_t n : {1u, 10u, 1000u}) {
        double prev = -1.0;
        for (double q = 0.0; q <= 1.0; q += 1.0 / 64) {
            const double v = photonic_link_prob(q, n);
            CHECK(v >= prev);
            prev = v;
        }
    }
}

TEST_CASE("interaction cutoff")
{
    ModelParams p;
    p.cutoff_epsilon = 0.0;
    CHECK(std::isinf(interaction_cutoff(p)));

    p.cutoff_epsilon = 1e-12;
    CHECK(interaction_cutoff(p) == doctest::Approx(684.25484443481816713).epsilon(1e-9));
    CHECK(combined_link_prob(interaction_cutoff(p) * (1 + 1e-9), p) < 1e-12);

    ModelParams q;
    q.waxman_scale_km = std::numeric_limits<double>::max();
    q.n_pulses = 1;
    q.loss_db_per_km = 0.2;
    q.cutoff_epsilon = 1e-6;
    CHECK(interaction_cutoff(q) == doctest::Approx(300.0).epsilon(1e-9));
}

TEST_CASE("two coincident nodes always link")
{
    ModelParams p = small_disk(2, 10);
    const std::vector<Point> pts{{0.0, 0.0}, {0.0, 0.0}};
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto r = generate_realization(pts, p, {s, 0});
        REQUIRE(r.fiber.edges.size() == 1);
        REQUIRE(r.photonic.edges.size() == 1);
    }
}

TEST_CASE("generated graphs are simple and photonic edges are fiber edges")
{
    const ModelParams p = small_disk(800, 1200);
    for (std::uint64_t idx = 0; idx < 5; ++idx) {
        const SeedSpec seed{99, idx};
        const auto pos = sample_node_positions(p, seed);
        const auto r = generate_realization(pos.coords, p, seed);
        const std::set<Edge> fiber(r.fiber.edges.begin(), r.fiber.edges.end());
        CHECK(fiber.size() == r.fiber.edges.size());
        CHECK(std::is_sorted(r.fiber.edges.begin(), r.fiber.edges.end()));
        CHECK(std::is_sorted(r.photonic.edges.begin(), r.photonic.edges.end()));
        for (const auto& e : r.fiber.edges) CHECK(e.i < e.j);
        for (const auto& e : r.photonic.edges) CHECK(fiber.contains(e));
        CHECK(r.fiber.layer == Layer::fiber);
        CHECK(r.photonic.layer == Layer::photonic);
    }
}

TEST_CASE("grid generator equals the naive generator in exact mode")
{
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        ModelParams p;
        p.n_nodes = 2 + static_cast<std::uint32_t>(rng() % 199);
        p.radius_km = 100.0 + static_cast<double>(rng() % 3000);
        p.cutoff_epsilon = 0.0;
        const SeedSpec seed{rng(), rng() % 1000};
        const auto pos = sample_node_positions(p, seed);
        const auto grid = generate_realization(pos.coords, p, seed, 1);
        const auto naive = generate_realization_naive(pos.coords, p, seed);
        REQUIRE(grid.fiber == naive.fiber);
        REQUIRE(grid.photonic == naive.photonic);
    }
}

TEST_CASE("grid generator equals the naive generator with the default cutoff")
{
    for (std::uint64_t s = 0; s < 10; ++s) {
        ModelParams p = small_disk(600, 2500);
        const SeedSpec seed{s, 0};
        const auto pos = sample_node_positions(p, seed);
        CHECK(generate_realization(pos.coords, p, seed) == generate_realization_naive(pos.coords, p, seed));
    }
}

TEST_CASE("generation is independent of the thread count")
{
    ModelParams p = small_disk(3000, 3000);
    const SeedSpec seed{5, 1};
    const auto pos = sample_node_positions(p, seed);
    const auto one = generate_realization(pos.coords, p, seed, 1);
    CHECK(generate_realization(pos.coords, p, seed, 2) == one);
    CHECK(generate_realization(pos.coords, p, seed, 8) == one);
}

TEST_CASE("per-pair edge frequency matches the combined law")
{
    const ModelParams p;
    for (double d : {50.0, 150.0, 226.0, 400.0}) {
        const double expect = combined_link_prob(d, p);
        const int trials = 20000;
        int hits = 0;
        for (int t = 0; t < trials; ++t)
            if (decide_pair(0, 1, d, p, {static_cast<std::uint64_t>(t), 3}).photonic) ++hits;
        const double se = std::sqrt(expect * (1 - expect) / trials);
        CHECK(std::abs(hits / static_cast<double>(trials) - expect) <= 3.0 * se + 1e-12);
    }
}

TEST_CASE("photonic acceptance among fiber edges near 100 km")
{
    const ModelParams p;  // R = 1800, N = 1000
    std::uint64_t fiber = 0, photonic = 0;
    for (std::uint64_t idx = 0; idx < 40; ++idx) {
        const SeedSpec seed{7, idx};
        const auto pos = sample_node_positions(p, seed);
        const auto r = generate_realization(pos.coords, p, seed);
        const std::set<Edge> ph(r.photonic.edges.begin(), r.photonic.edges.end());
        for (const auto& e : r.fiber.edges) {
            const double d = distance_km(pos.coords[e.i], pos.coords[e.j]);
            if (d < 95.0 || d > 105.0) continue;
            ++fiber;
            if (ph.contains(e)) ++photonic;
        }
    }
    REQUIRE(fiber > 1000);
    // P(100 km) = 0.99996; the window edges give at least 0.99992.
    const double rate = static_cast<double>(photonic) / static_cast<double>(fiber);
    CHECK(rate > 0.9990);
    CHECK(photonic_link_prob(transmissivity(100.0, 0.2), 1000) == doctest::Approx(0.99995682875258934175).epsilon(1e-12));
}

TEST_CASE("photonic-on-all-pairs variant")
{
    ModelParams p = small_disk(400, 800);
    p.photonic_on_all_pairs = true;
    const SeedSpec seed{1, 1};
    const auto pos = sample_node_positions(p, seed);
    const auto r = generate_realization(pos.coords, p, seed);
    const std::set<Edge> fiber(r.fiber.edges.begin(), r.fiber.edges.end());
    bool outside = false;
    for (const auto& e : r.photonic.edges) outside = outside || !fiber.contains(e);
    CHECK(outside);
    p.cutoff_epsilon = 0.0;
    CHECK(generate_realization(pos.coords, p, seed) == generate_realization_naive(pos.coords, p, seed));
}
