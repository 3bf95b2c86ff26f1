#include "qnet/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "qnet/cli/csv.hpp"

namespace qnet::cli {

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

double to_double(const std::string& key, const std::string& v)
{
    try {
        return parse_double(v);
    } catch (const SchemaError&) {
        throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
    }
}

template <class Int>
Int to_int(const std::string& key, const std::string& v)
{
    Int out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw ConfigError("config: '" + key + "' expects a non-negative integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: '" + key + "' expects true/false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v)
{
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void apply(ScenarioConfig& c, const std::string& section, const std::string& key, const std::string& value)
{
    const std::string full = section + "." + key;
    ModelParams& m = c.model;
    if (section == "model") {
        if (key == "radius_km") m.radius_km = to_double(full, value);
        else if (key == "n_nodes") m.n_nodes = to_int<std::uint32_t>(full, value);
        else if (key == "waxman_beta") m.waxman_beta = to_double(full, value);
        else if (key == "waxman_scale_km") m.waxman_scale_km = to_double(full, value);
        else if (key == "loss_db_per_km") m.loss_db_per_km = to_double(full, value);
        else if (key == "n_pulses") m.n_pulses = to_int<std::uint32_t>(full, value);
        else if (key == "cutoff_epsilon") m.cutoff_epsilon = to_double(full, value);
        else if (key == "photonic_on_all_pairs") m.photonic_on_all_pairs = to_bool(full, value);
        else throw ConfigError("config: unknown key '" + full + "'");
        return;
    }
    if (section == "run") {
        if (key == "realizations") c.realizations = to_int<std::uint32_t>(full, value);
        else if (key == "base_seed") c.base_seed = to_int<std::uint64_t>(full, value);
        else if (key == "measure_paths") c.measure_paths = to_bool(full, value);
        else if (key == "layer") c.layer = parse_layer(value);
        else if (key == "max_exact_sources") c.max_exact_sources = to_int<std::uint32_t>(full, value);
        else if (key == "output_dir") c.output_dir = value;
        else if (key == "emit_per_realization") c.emit_per_realization = to_bool(full, value);
        else throw ConfigError("config: unknown key '" + full + "'");
        return;
    }
    if (section == "sweep") {
        if (!c.sweep) c.sweep.emplace();
        SweepSpec& s = *c.sweep;
        if (key == "axis") s.axis = parse_sweep_axis(value);
        else if (key == "values") {
            s.grid.values.clear();
            for (const auto& item : split_list(value)) s.grid.values.push_back(to_double(full, item));
        } else if (key == "from") s.grid.from = to_double(full, value);
        else if (key == "to") s.grid.to = to_double(full, value);
        else if (key == "steps") s.grid.steps = to_int<std::uint32_t>(full, value);
        else if (key == "spacing") {
            if (value == "linear") s.grid.spacing = Spacing::linear;
            else if (value == "log") s.grid.spacing = Spacing::log;
            else throw ConfigError("config: sweep.spacing must be linear or log");
        } else if (key == "sizes") {
            s.sizes.clear();
            for (const auto& item : split_list(value)) s.sizes.push_back(to_int<std::uint32_t>(full, item));
        } else throw ConfigError("config: unknown key '" + full + "'");
        return;
    }
    throw ConfigError("config: unknown section '" + section + "'");
}

}  // namespace

std::string to_string(Layer layer) { return layer == Layer::fiber ? "fiber" : "photonic"; }

Layer parse_layer(const std::string& name)
{
    if (name == "fiber") return Layer::fiber;
    if (name == "photonic") return Layer::photonic;
    throw std::invalid_argument("unknown layer '" + name + "'");
}

std::vector<double> GridSpec::expand() const
{
    std::vector<double> grid;
    if (!values.empty()) {
        grid = values;
    } else {
        if (steps == 0) throw std::invalid_argument("sweep grid: steps must be >= 1");
        if (spacing == Spacing::log && !(from > 0.0 && to > 0.0))
            throw std::invalid_argument("sweep grid: log spacing needs positive endpoints");
        for (std::uint32_t k = 0; k < steps; ++k) {
            const double t = steps == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(steps - 1);
            grid.push_back(spacing == Spacing::linear ? from + t * (to - from)
                                                      : std::exp(std::log(from) + t * (std::log(to) - std::log(from))));
        }
        if (steps > 1) grid.back() = to;
    }
    if (grid.empty()) throw std::invalid_argument("sweep grid is empty");
    for (double v : grid)
        if (!std::isfinite(v)) throw std::invalid_argument("sweep grid holds a non-finite value");
    const bool up = grid.size() < 2 || grid[1] > grid[0];
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (up ? !(grid[k] > grid[k - 1]) : !(grid[k] < grid[k - 1]))
            throw std::invalid_argument("sweep grid is not strictly monotone");
    return grid;
}

std::string ScenarioConfig::to_text() const
{
    std::ostringstream o;
    const ModelParams& m = model;
    o << "[model]\n"
      << "radius_km = " << format_double(m.radius_km) << '\n'
      << "n_nodes = " << m.n_nodes << '\n'
      << "waxman_beta = " << format_double(m.waxman_beta) << '\n'
      << "waxman_scale_km = " << format_double(m.waxman_scale_km) << '\n'
      << "loss_db_per_km = " << format_double(m.loss_db_per_km) << '\n'
      << "n_pulses = " << m.n_pulses << '\n'
      << "cutoff_epsilon = " << format_double(m.cutoff_epsilon) << '\n'
      << "photonic_on_all_pairs = " << (m.photonic_on_all_pairs ? "true" : "false") << '\n'
      << "\n[run]\n"
      << "realizations = " << realizations << '\n'
      << "base_seed = " << base_seed << '\n'
      << "measure_paths = " << (measure_paths ? "true" : "false") << '\n'
      << "layer = " << to_string(layer) << '\n'
      << "max_exact_sources = " << max_exact_sources << '\n'
      << "output_dir = " << output_dir << '\n'
      << "emit_per_realization = " << (emit_per_realization ? "true" : "false") << '\n';
    if (sweep) {
        o << "\n[sweep]\n"
          << "axis = " << qnet::to_string(sweep->axis) << '\n';
        const GridSpec& g = sweep->grid;
        if (!g.values.empty()) {
            o << "values = ";
            for (std::size_t k = 0; k < g.values.size(); ++k) o << (k ? ", " : "") << format_double(g.values[k]);
            o << '\n';
        } else {
            o << "from = " << format_double(g.from) << '\n'
              << "to = " << format_double(g.to) << '\n'
              << "steps = " << g.steps << '\n'
              << "spacing = " << (g.spacing == Spacing::log ? "log" : "linear") << '\n';
        }
        if (!sweep->sizes.empty()) {
            o << "sizes = ";
            for (std::size_t k = 0; k < sweep->sizes.size(); ++k) o << (k ? ", " : "") << sweep->sizes[k];
            o << '\n';
        }
    }
    return o.str();
}

ScenarioConfig ScenarioConfig::parse(std::string_view text)
{
    ScenarioConfig c;
    std::string section;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("config line " + std::to_string(line_no) + ": bad section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (section == "sweep" && !c.sweep) c.sweep.emplace();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        if (section.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": key outside a section");
        apply(c, section, trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)));
    }
    return c;
}

void ScenarioConfig::set(const std::string& assignment)
{
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
        throw ConfigError("override must look like section.key=value, got '" + assignment + "'");
    apply(*this, trim(std::string_view(assignment).substr(0, dot)),
          trim(std::string_view(assignment).substr(dot + 1, eq - dot - 1)),
          trim(std::string_view(assignment).substr(eq + 1)));
}

void ScenarioConfig::validate() const
{
    model.validate();
    if (realizations < 1) throw ConfigError("config: run.realizations must be >= 1");
    if (sweep) (void)sweep->grid.expand();
}

ScenarioConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
        const auto j = nlohmann::json::parse(text);
        if (!j.contains("config_text")) throw ConfigError(path + ": manifest has no config_text");
        return ScenarioConfig::parse(j.at("config_text").get<std::string>());
    }
    return ScenarioConfig::parse(text);
}

}  // namespace qnet::cli
