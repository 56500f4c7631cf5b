#pragma once

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "ballistic/errors.hpp"

namespace ballistic {

/// Plain-text table: one '#' header line of tab-separated `name[unit]` entries, then
/// tab-separated rows. Numbers use 17 significant digits, so reading back is exact.
struct Table {
    struct Column {
        std::string name;
        std::string unit;
        bool operator==(const Column&) const = default;
    };
    using Cell = std::variant<double, std::string>;

    std::vector<Column> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row) {
        if (row.size() != columns.size()) throw IoError("row width does not match header");
        rows.push_back(std::move(row));
    }

    std::size_t column_index(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (columns[i].name == name) return i;
        }
        throw IoError("no column named '" + name + "'");
    }

    double number(std::size_t row, const std::string& name) const {
        const auto& cell = rows.at(row).at(column_index(name));
        if (const auto* d = std::get_if<double>(&cell)) return *d;
        throw IoError("column '" + name + "' holds text");
    }

    std::vector<double> numbers(const std::string& name) const {
        std::vector<double> out;
        for (std::size_t r = 0; r < rows.size(); ++r) out.push_back(number(r, name));
        return out;
    }
};

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_table(const Table& table) {
    std::string out = "# ";
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) out += '\t';
        out += table.columns[i].name + "[" + table.columns[i].unit + "]";
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += '\t';
            if (const auto* d = std::get_if<double>(&row[i])) {
                out += format_number(*d);
            } else {
                out += std::get<std::string>(row[i]);
            }
        }
        out += '\n';
    }
    return out;
}

inline Table parse_table(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
        throw IoError("table must start with a '# ' header line");
    }
    Table table;
    {
        std::istringstream header(line.substr(2));
        std::string entry;
        while (std::getline(header, entry, '\t')) {
            const auto open = entry.find('[');
            if (open == std::string::npos || entry.back() != ']') {
                throw IoError("malformed header entry '" + entry + "'");
            }
            table.columns.push_back({entry.substr(0, open), entry.substr(open + 1, entry.size() - open - 2)});
        }
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<Table::Cell> row;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, '\t')) {
            char* end = nullptr;
            errno = 0;
            const double v = std::strtod(cell.c_str(), &end);
            if (!cell.empty() && end == cell.c_str() + cell.size()) {
                row.emplace_back(v);
            } else {
                row.emplace_back(cell);
            }
        }
        table.add_row(std::move(row));
    }
    return table;
}

inline void write_table(const std::filesystem::path& path, const Table& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << format_table(table);
    if (!out) throw IoError("write failed: " + path.string());
}

inline Table read_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_table(buf.str());
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

}  // namespace ballistic
