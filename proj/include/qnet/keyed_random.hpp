#pragma once

#include <array>
#include <cstdint>

namespace qnet {

/// Identifies one realization of an ensemble. All randomness consumed while
/// building that realization is a pure function of this pair plus a
/// purpose tag and the node indices involved.
struct SeedSpec {
    std::uint64_t base_seed = 0;
    std::uint64_t realization_index = 0;

    friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/// Purpose tags keep independent random streams apart.
enum class RandomTag : std::uint32_t {
    node_position = 1,
    pair_link = 2,
    path_sources = 3,
};

using PhiloxBlock = std::array<std::uint32_t, 4>;

/// Philox4x32-10 block function (Salmon et al., Random123).
constexpr PhiloxBlock philox4x32(PhiloxBlock ctr, std::array<std::uint32_t, 2> key) noexcept
{
    constexpr std::uint32_t m0 = 0xD2511F53u;
    constexpr std::uint32_t m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u;
    constexpr std::uint32_t w1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{m0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{m1} * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += w0;
        key[1] += w1;
    }
    return ctr;
}

/// 53-bit uniform in [0, 1) from two 32-bit words.
constexpr double to_unit_double(std::uint32_t hi, std::uint32_t lo) noexcept
{
    const std::uint64_t bits = (std::uint64_t{hi} << 32) | lo;
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Two independent uniforms in [0, 1) keyed by (seed, tag, a, b).
struct UniformPair {
    double first;
    double second;
};

/// Counter-based draw. The key is the base seed; the counter packs
/// (a, b, realization, tag). Realization indices must fit in 32 bits.
inline UniformPair keyed_uniforms(const SeedSpec& seed, RandomTag tag,
                                  std::uint32_t a, std::uint32_t b) noexcept
{
    const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed.base_seed),
                                           static_cast<std::uint32_t>(seed.base_seed >> 32)};
    const PhiloxBlock out = philox4x32(
        {a, b, static_cast<std::uint32_t>(seed.realization_index), static_cast<std::uint32_t>(tag)},
        key);
    return {to_unit_double(out[0], out[1]), to_unit_double(out[2], out[3])};
}

/// SplitMix64 finalizer; used to derive sub-seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept
{
    return mix64(base ^ mix64(index + 0x5EED5EEDull));
}

}  // namespace qnet
