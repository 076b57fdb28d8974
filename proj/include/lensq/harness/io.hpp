#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace lensq::harness {

using Json = nlohmann::json;
using Report = nlohmann::ordered_json;

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    std::ostringstream ss;
    ss << std::hex;
    ss.width(16);
    ss.fill('0');
    ss << v;
    return ss.str();
}

/// Shortest decimal text that reads back to the same double.
inline std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

using CsvCell = std::variant<double, long long, std::string>;

/// CSV file with a header row. Every row must have one cell per column.
class CsvWriter {
public:
    CsvWriter(const std::string& path, std::vector<std::string> columns) : path_(path), columns_(std::move(columns)) {
        out_.open(path);
        if (!out_) throw std::runtime_error("cannot open '" + path + "' for writing");
        for (std::size_t i = 0; i < columns_.size(); ++i) out_ << (i ? "," : "") << columns_[i];
        out_ << '\n';
    }

    void row(std::initializer_list<CsvCell> cells) { row(std::vector<CsvCell>(cells)); }

    void row(const std::vector<CsvCell>& cells) {
        if (cells.size() != columns_.size())
            throw std::invalid_argument("csv '" + path_ + "': row has " + std::to_string(cells.size()) +
                                        " cells, expected " + std::to_string(columns_.size()));
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            std::visit(
                [this](const auto& v) {
                    using V = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<V, double>) out_ << format_number(v);
                    else out_ << v;
                },
                cells[i]);
        }
        out_ << '\n';
        if (!out_) throw std::runtime_error("write to '" + path_ + "' failed");
        ++rows_;
    }

    std::size_t rows() const { return rows_; }

private:
    std::string path_;
    std::vector<std::string> columns_;
    std::ofstream out_;
    std::size_t rows_ = 0;
};

/// Parsed CSV: header names and the raw cell text of every row.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        throw std::out_of_range("csv: no column named '" + name + "'");
    }
};

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ss(line);
        while (std::getline(ss, cell, ',')) {
            if (!cell.empty() && cell.back() == '\r') cell.pop_back();
            cells.push_back(cell);
        }
        return cells;
    };
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("csv '" + path + "' is empty");
    t.columns = split(line);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cells = split(line);
        if (cells.size() != t.columns.size())
            throw std::runtime_error("csv '" + path + "': line " + std::to_string(lineno) + " has the wrong cell count");
        t.rows.push_back(std::move(cells));
    }
    return t;
}

inline void write_report(const std::string& path, const Report& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << report.dump(2) << '\n';
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw std::runtime_error("config '" + path + "': " + e.what());
    }
}

}  // namespace lensq::harness
