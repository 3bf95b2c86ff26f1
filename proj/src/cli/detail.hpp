#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qnet/cli/commands.hpp"
#include "qnet/cli/csv.hpp"
#include "qnet/criticality.hpp"

namespace qnet::cli::detail {

using json = nlohmann::ordered_json;

void write_json(const std::filesystem::path& path, const json& value);

/// Collects emitted files and writes manifest.json next to them.
class Manifest {
public:
    Manifest(std::string command, const CommandContext& ctx) : command_(std::move(command)), timestamp_(ctx.timestamp) {}

    void add_csv(const std::string& name, std::size_t rows) { files_.push_back({name, rows}); }
    void add_json(const std::string& name) { files_.push_back({name, std::nullopt}); }
    json& body() { return body_; }
    void write(const std::filesystem::path& dir, const std::string& status = "ok") const;

private:
    struct Entry {
        std::string name;
        std::optional<std::size_t> rows;
    };
    std::string command_;
    std::string timestamp_;
    json body_ = json::object();
    std::vector<Entry> files_;
};

/// A sweep.csv row, addressed through its table.
struct SweepRow {
    const CsvTable* table;
    std::size_t index;

    [[nodiscard]] bool has(const std::string& col) const { return table->has_column(col); }
    [[nodiscard]] const std::string& text(const std::string& col) const { return table->rows[index][table->column(col)]; }
    [[nodiscard]] double number(const std::string& col) const { return table->number(index, table->column(col)); }
    /// Sweep axis of the row; tables without an axis column count as density sweeps.
    [[nodiscard]] std::string axis() const;
};

/// Resolves each input (a sweep.csv or a directory holding one) and loads it.
[[nodiscard]] std::vector<CsvTable> load_sweep_tables(const std::vector<std::filesystem::path>& inputs);
[[nodiscard]] std::vector<SweepRow> rows_of(const std::vector<CsvTable>& tables);

/// Curves of `value_col` per N from density-sweep rows. Sizes with fewer than
/// two points are dropped. Throws SchemaError on missing columns and
/// std::invalid_argument on duplicate (N, rho) points.
[[nodiscard]] CurveSet density_curves(const std::vector<SweepRow>& rows, const std::string& value_col,
                                      const std::optional<std::string>& stderr_col = std::nullopt);

[[nodiscard]] json to_json(const PowerLawFit& fit);
[[nodiscard]] json to_json(const CrossingEstimate& c);

}  // namespace qnet::cli::detail
