// table.hpp
// Delimited result tables. Every file starts with `# schema=renyi/1`, then
// `# key=value` metadata lines, a header row and the data rows.

#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace renyi {

inline constexpr const char* kSchema = "renyi/1";

// Shortest round-trippable text for a double; "nan"/"inf"/"-inf" otherwise.
inline std::string fmt_num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    for (int prec = 10; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

struct Table {
    std::string name;
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_meta(std::string key, std::string value) { meta.emplace_back(std::move(key), std::move(value)); }
    void add_meta(std::string key, double value) { meta.emplace_back(std::move(key), fmt_num(value)); }

    // Mixed row builder: strings pass through, numbers are formatted.
    struct Row {
        std::vector<std::string> cells;
        Row& operator<<(const std::string& s) {
            cells.push_back(s);
            return *this;
        }
        Row& operator<<(const char* s) {
            cells.emplace_back(s);
            return *this;
        }
        Row& operator<<(double v) {
            cells.push_back(fmt_num(v));
            return *this;
        }
        Row& operator<<(int v) {
            cells.push_back(std::to_string(v));
            return *this;
        }
        Row& operator<<(std::size_t v) {
            cells.push_back(std::to_string(v));
            return *this;
        }
        Row& operator<<(bool v) {
            cells.emplace_back(v ? "true" : "false");
            return *this;
        }
    };

    void add(const Row& r) {
        if (r.cells.size() != columns.size()) throw ParameterError("Table::add: row width does not match header");
        rows.push_back(r.cells);
    }

    // Index of a column, or throws.
    std::size_t col(const std::string& c) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == c) return i;
        throw ParameterError("Table: no column " + c);
    }
};

namespace detail {

inline std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace detail

inline void write_csv(std::ostream& os, const Table& t) {
    os << "# schema=" << kSchema << '\n';
    if (!t.name.empty()) os << "# table=" << t.name << '\n';
    for (const auto& [k, v] : t.meta) os << "# " << k << '=' << v << '\n';
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << detail::csv_cell(cells[i]);
        os << '\n';
    };
    line(t.columns);
    for (const auto& r : t.rows) line(r);
}

inline std::string to_csv(const Table& t) {
    std::ostringstream os;
    write_csv(os, t);
    return os.str();
}

inline void write_csv(const std::string& path, const Table& t) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open " + path + " for writing");
    write_csv(f, t);
    if (!f) throw InputError("write failed: " + path);
}

} // namespace renyi
