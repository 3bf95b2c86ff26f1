#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qnet/cli/commands.hpp"
#include "qnet/cli/config.hpp"
#include "qnet/cli/csv.hpp"
#include "qnet/parallel.hpp"

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2, kSchema = 3, kInterrupted = 130 };

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint32_t> realizations;
    std::string out;
    bool photonic_on_all_pairs = false;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c)
{
    cmd->add_option("--config", c.config_path, "Scenario file (key = value with sections) or a manifest.json");
    cmd->add_option("--seed", c.seed, "Base seed");
    cmd->add_option("--realizations", c.realizations, "Realizations per parameter point");
    cmd->add_flag("--photonic-on-all-pairs", c.photonic_on_all_pairs,
                  "Model variant: attempt photonic links on every pair, not only fiber edges");
    cmd->add_option("--set", c.overrides, "Override a config key, e.g. --set model.n_nodes=2000")->take_all();
}

qnet::cli::ScenarioConfig build_config(const Common& c)
{
    qnet::cli::ScenarioConfig cfg = c.config_path.empty() ? qnet::cli::ScenarioConfig{} : qnet::cli::load_config(c.config_path);
    for (const auto& o : c.overrides) cfg.set(o);
    if (c.seed) cfg.base_seed = *c.seed;
    if (c.realizations) cfg.realizations = *c.realizations;
    if (c.photonic_on_all_pairs) cfg.model.photonic_on_all_pairs = true;
    if (!c.out.empty()) cfg.output_dir = c.out;
    cfg.validate();
    return cfg;
}

unsigned resolve_thread_count(const std::optional<unsigned>& flag)
{
    if (flag) return qnet::resolve_threads(*flag);
    if (const char* env = std::getenv("QNETSIM_THREADS"); env && *env) {
        try {
            return qnet::resolve_threads(static_cast<unsigned>(std::stoul(env)));
        } catch (const std::exception&) {
            throw std::invalid_argument(std::string("QNETSIM_THREADS must be a non-negative integer, got '") + env + "'");
        }
    }
    return qnet::resolve_threads(0);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Monte Carlo simulator for photonic quantum networks over fiber topologies"};
    app.set_version_flag("--version", qnet::cli::kToolVersion);
    app.require_subcommand(1);

    Common common;
    std::optional<unsigned> threads;
    app.add_option("--threads", threads, "Worker threads (0 = all cores); never changes output");

    auto* generate = app.add_subcommand("generate", "Sample one realization and write nodes, edges and stats");
    add_common(generate, common);
    generate->add_option("--out", common.out, "Output directory");
    std::uint64_t realization_index = 0;
    bool ensemble = false;
    generate->add_option("--index", realization_index, "Realization index within the seed stream");
    generate->add_flag("--ensemble", ensemble, "Also aggregate `realizations` samples into the stats");
    generate->add_option("--threads", threads, "Worker threads");

    auto* sweep = app.add_subcommand("sweep", "Run ensembles along a parameter grid");
    add_common(sweep, common);
    sweep->add_option("--out", common.out, "Output directory");
    sweep->add_option("--threads", threads, "Worker threads");

    qnet::cli::CriticalOptions crit;
    std::string crit_out = "critical";
    std::vector<std::string> crit_inputs;
    std::optional<double> crit_rho_c;
    std::string beta_window;
    std::string tau_binning = "log";
    auto* critical = app.add_subcommand("critical", "Estimate the critical point and exponents from sweep.csv files");
    critical->add_option("inputs", crit_inputs, "sweep.csv files or directories holding them")->required();
    critical->add_option("--out", crit_out, "Output directory");
    critical->add_option("--rho-c", crit_rho_c, "Use this critical density instead of the crossing estimate");
    critical->add_option("--beta-window", beta_window, "Reduced-density window lo:hi for the beta fit");
    critical->add_option("--tau-min", crit.tau.min_size, "Smallest cluster size in the tau fit");
    critical->add_option("--tau-max-fraction", crit.tau_max_fraction, "Largest cluster size in the tau fit, as a fraction of N");
    critical->add_option("--tau-binning", tau_binning, "raw or log")->check(CLI::IsMember({"raw", "log"}));
    critical->add_option("--tau-bin-ratio", crit.tau.bin_ratio, "Ratio between consecutive log bins");
    critical->add_option("--path-min-m", crit.path_min_m, "Minimum giant fraction for rows in the path fit");

    qnet::cli::CollapseCommandOptions coll;
    std::string coll_out = "collapse";
    std::vector<std::string> coll_inputs;
    std::optional<double> coll_rho_c;
    std::string form = "s2_ratio";
    std::string bounds_text;
    std::string initial_text;
    auto* collapse = app.add_subcommand("collapse", "Optimize a finite-size-scaling collapse");
    collapse->add_option("inputs", coll_inputs, "sweep.csv files or directories holding them")->required();
    collapse->add_option("--out", coll_out, "Output directory");
    collapse->add_option("--form", form, "order_parameter, susceptibility, cluster_size or s2_ratio");
    collapse->add_option("--rho-c", coll_rho_c, "Critical density; defaults to the S2/S1 crossing");
    collapse->add_option("--bounds", bounds_text, "Exponent bounds, e.g. nu=1:6,gamma_prime_over_nu=0:2");
    collapse->add_option("--initial", initial_text, "Starting exponents, e.g. nu=2.5");
    collapse->add_option("--grid-steps", coll.grid_steps, "Grid points per exponent before refinement");
    collapse->add_option("--window", coll.window, "Largest |rho - rho_c| / rho_c entering the collapse");

    std::string fig_input;
    std::string fig_out = "figures";
    std::vector<std::string> only;
    auto* figures = app.add_subcommand("figures", "Write figure-data CSVs from earlier outputs");
    figures->add_option("input_dir", fig_input, "Directory searched recursively for outputs")->required();
    figures->add_option("--out", fig_out, "Output directory");
    figures->add_option("--only", only, "Restrict to these figure ids; missing inputs then fail")->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        qnet::cli::CommandContext ctx{resolve_thread_count(threads), qnet::cli::manifest_timestamp()};
        if (*generate) {
            const auto cfg = build_config(common);
            qnet::cli::cmd_generate(cfg, cfg.output_dir, ctx, {realization_index, ensemble});
        } else if (*sweep) {
            const auto cfg = build_config(common);
            qnet::cli::install_interrupt_handlers();
            qnet::cli::cmd_sweep(cfg, cfg.output_dir, ctx);
        } else if (*critical) {
            crit.inputs.assign(crit_inputs.begin(), crit_inputs.end());
            crit.rho_c = crit_rho_c;
            if (!beta_window.empty()) {
                const auto colon = beta_window.find(':');
                if (colon == std::string::npos) throw std::invalid_argument("--beta-window must be lo:hi");
                crit.beta_window = {qnet::cli::parse_double(beta_window.substr(0, colon)),
                                    qnet::cli::parse_double(beta_window.substr(colon + 1))};
            }
            crit.tau.binning = tau_binning == "raw" ? qnet::Binning::raw : qnet::Binning::logarithmic;
            qnet::cli::cmd_critical(crit, crit_out, ctx);
        } else if (*collapse) {
            coll.inputs.assign(coll_inputs.begin(), coll_inputs.end());
            coll.form = qnet::parse_scaling_form(form);
            coll.rho_c = coll_rho_c;
            if (!bounds_text.empty()) coll.bounds = qnet::cli::parse_bounds(bounds_text);
            if (!initial_text.empty()) coll.initial = qnet::cli::parse_exponents(initial_text);
            qnet::cli::cmd_collapse(coll, coll_out, ctx);
        } else if (*figures) {
            const auto r = qnet::cli::cmd_figures(fig_input, fig_out, ctx, only);
            for (const auto& m : r.missing) std::cerr << "missing input for " << m << '\n';
            if (!only.empty() && !r.missing.empty()) return kFailure;
        }
    } catch (const qnet::cli::Interrupted& e) {
        std::cerr << "qnetsim: " << e.what() << "; partial results kept\n";
        return kInterrupted;
    } catch (const qnet::cli::SchemaError& e) {
        std::cerr << "qnetsim: schema error: " << e.what() << '\n';
        return kSchema;
    } catch (const std::invalid_argument& e) {
        std::cerr << "qnetsim: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "qnetsim: " << e.what() << '\n';
        return kFailure;
    }
    return kOk;
}
