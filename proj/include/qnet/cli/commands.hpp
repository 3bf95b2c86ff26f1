#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qnet/cli/config.hpp"
#include "qnet/criticality.hpp"

namespace qnet::cli {

inline constexpr const char* kToolVersion = "0.3.0";

struct CommandContext {
    /// Worker threads; never changes output.
    unsigned threads = 1;
    /// ISO-8601 UTC timestamp recorded in manifests.
    std::string timestamp;
};

/// Timestamp for manifests: SOURCE_DATE_EPOCH when set, else the wall clock.
[[nodiscard]] std::string manifest_timestamp();

struct GenerateOptions {
    std::uint64_t realization_index = 0;
    /// Also run `realizations` samples and add ensemble means to the stats.
    bool ensemble = false;
};

void cmd_generate(const ScenarioConfig& config, const std::filesystem::path& out, const CommandContext& ctx,
                  const GenerateOptions& options = {});

/// Thrown by cmd_sweep after SIGINT/SIGTERM; partial output is kept.
class Interrupted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Install SIGINT/SIGTERM handlers that make a running sweep stop after the
/// current grid point.
void install_interrupt_handlers();

void cmd_sweep(const ScenarioConfig& config, const std::filesystem::path& out, const CommandContext& ctx);

struct CriticalOptions {
    std::vector<std::filesystem::path> inputs;
    /// Skips the crossing search when set.
    std::optional<double> rho_c;
    ReducedWindow beta_window{0.0, 0.6};
    TauOptions tau{4, 0xFFFFFFFFu, Binning::logarithmic, 2.0};
    /// Upper cluster size for the tau fit as a fraction of N.
    double tau_max_fraction = 0.02;
    /// Rows with m at least this large enter the path-scaling fit.
    double path_min_m = 0.9;
};

void cmd_critical(const CriticalOptions& options, const std::filesystem::path& out, const CommandContext& ctx);

struct CollapseCommandOptions {
    std::vector<std::filesystem::path> inputs;
    ScalingForm form = ScalingForm::s2_ratio;
    std::optional<double> rho_c;
    ExponentBounds bounds;
    Exponents initial;
    std::size_t grid_steps = 21;
    /// Only rows with |rho - rho_c| / rho_c <= window enter the collapse.
    double window = 0.25;
};

/// "nu=1:6,gamma_prime_over_nu=0:2" -> bounds.
[[nodiscard]] ExponentBounds parse_bounds(const std::string& text);
/// "nu=2.5,gamma_prime_over_nu=1" -> exponents.
[[nodiscard]] Exponents parse_exponents(const std::string& text);

void cmd_collapse(const CollapseCommandOptions& options, const std::filesystem::path& out, const CommandContext& ctx);

struct FiguresResult {
    std::vector<std::string> written;
    std::vector<std::string> missing;
};

/// Writes every figure-data CSV the inputs support. `only`, when non-empty,
/// restricts the set; requested-but-unsupported figures are reported missing.
FiguresResult cmd_figures(const std::filesystem::path& input_dir, const std::filesystem::path& out,
                          const CommandContext& ctx, const std::vector<std::string>& only = {});

}  // namespace qnet::cli
