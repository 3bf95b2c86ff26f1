#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qnet::cli {

/// Raised when an input file lacks required columns or holds malformed values.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest text that round-trips: 17 significant digits, '.' separator,
/// "nan" / "inf" / "-inf" for non-finite values.
[[nodiscard]] std::string format_double(double v);
[[nodiscard]] double parse_double(const std::string& text);

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);

    void row(const std::vector<std::string>& fields);
    /// Writes a raw marker line (used to flag partial output).
    void marker(const std::string& line);
    void flush();

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::size_t columns_;
    std::size_t rows_ = 0;
};

struct CsvTable {
    std::filesystem::path source;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] bool has_column(const std::string& name) const;
    /// Throws SchemaError when the column is missing.
    [[nodiscard]] std::size_t column(const std::string& name) const;
    [[nodiscard]] double number(std::size_t row, std::size_t col) const;
};

/// Reads a header-first CSV; lines starting with '#' are skipped.
[[nodiscard]] CsvTable read_csv(const std::filesystem::path& path);

}  // namespace qnet::cli
