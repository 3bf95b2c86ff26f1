#include "qnet/cli/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace qnet::cli {

std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& text)
{
    if (text == "nan") return std::nan("");
    if (text == "inf") return INFINITY;
    if (text == "-inf") return -INFINITY;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size())
        throw SchemaError("not a number: '" + text + "'");
    return v;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), columns_(header.size())
{
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    std::string line;
    for (std::size_t k = 0; k < header.size(); ++k) line += (k ? "," : "") + header[k];
    out_ << line << '\n';
}

void CsvWriter::row(const std::vector<std::string>& fields)
{
    if (fields.size() != columns_) throw std::logic_error("csv row width mismatch for " + path_.string());
    std::string line;
    for (std::size_t k = 0; k < fields.size(); ++k) line += (k ? "," : "") + fields[k];
    out_ << line << '\n';
    if (!out_) throw std::runtime_error("write failed: " + path_.string());
    ++rows_;
}

void CsvWriter::marker(const std::string& line)
{
    out_ << line << '\n';
    out_.flush();
}

void CsvWriter::flush()
{
    out_.flush();
    if (!out_) throw std::runtime_error("write failed: " + path_.string());
}

bool CsvTable::has_column(const std::string& name) const
{
    for (const auto& h : header)
        if (h == name) return true;
    return false;
}

std::size_t CsvTable::column(const std::string& name) const
{
    for (std::size_t k = 0; k < header.size(); ++k)
        if (header[k] == name) return k;
    throw SchemaError(source.string() + ": missing column '" + name + "'");
}

double CsvTable::number(std::size_t row, std::size_t col) const
{
    try {
        return parse_double(rows.at(row).at(col));
    } catch (const SchemaError& e) {
        throw SchemaError(source.string() + " row " + std::to_string(row + 2) + ": " + e.what());
    }
}

CsvTable read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    CsvTable t;
    t.source = path;
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string field;
        while (std::getline(ss, field, ',')) out.push_back(field);
        if (!s.empty() && s.back() == ',') out.emplace_back();
        return out;
    };
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!have_header) {
            t.header = split(line);
            have_header = true;
            continue;
        }
        auto fields = split(line);
        if (fields.size() != t.header.size())
            throw SchemaError(path.string() + ": row has " + std::to_string(fields.size()) + " fields, header has " +
                              std::to_string(t.header.size()));
        t.rows.push_back(std::move(fields));
    }
    if (!have_header) throw SchemaError(path.string() + ": empty file");
    return t;
}

}  // namespace qnet::cli
