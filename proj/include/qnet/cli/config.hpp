#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qnet/ensemble.hpp"
#include "qnet/model.hpp"

namespace qnet::cli {

enum class Spacing { linear, log };

/// Grid along one sweep axis: either explicit values or from/to/steps.
struct GridSpec {
    std::vector<double> values;
    double from = 0.0;
    double to = 0.0;
    std::uint32_t steps = 0;
    Spacing spacing = Spacing::linear;

    /// Expands to a strictly monotone, non-empty grid or throws.
    [[nodiscard]] std::vector<double> expand() const;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct SweepSpec {
    SweepAxis axis = SweepAxis::density_fixed_N;
    GridSpec grid;
    /// Optional list of N; the sweep is repeated once per size.
    std::vector<std::uint32_t> sizes;

    friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

/// Everything needed to reproduce a run. Serialized as flat key = value text
/// with [model], [run] and [sweep] sections.
struct ScenarioConfig {
    ModelParams model;
    std::uint32_t realizations = 1000;
    std::uint64_t base_seed = 1;
    bool measure_paths = false;
    Layer layer = Layer::photonic;
    std::uint32_t max_exact_sources = 2000;
    std::string output_dir = "out";
    bool emit_per_realization = false;
    std::optional<SweepSpec> sweep;

    /// Canonical text form; parse(to_text()) reproduces the config exactly.
    [[nodiscard]] std::string to_text() const;
    [[nodiscard]] static ScenarioConfig parse(std::string_view text);
    /// Applies one "section.key=value" override.
    void set(const std::string& assignment);
    void validate() const;

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Loads a config file; a manifest.json is accepted and its config echo used.
[[nodiscard]] ScenarioConfig load_config(const std::string& path);

[[nodiscard]] std::string to_string(Layer layer);
[[nodiscard]] Layer parse_layer(const std::string& name);

}  // namespace qnet::cli
