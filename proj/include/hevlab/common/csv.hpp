#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "hevlab/common/errors.hpp"

namespace hevlab::csv {

struct Row {
    std::size_t line = 0;
    std::vector<double> values;
};

struct Table {
    std::vector<std::string> header;
    std::vector<Row> rows;

    [[nodiscard]] std::size_t column(std::string_view name) const
    {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) {
                return i;
            }
        }
        throw ValidationError("missing CSV column '" + std::string(name) + "'");
    }
};

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',')
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

inline double parse_double(std::string_view field, std::size_t line)
{
    double value = 0.0;
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    if (!field.empty() && *first == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || field.empty()) {
        throw ParseError("malformed number '" + std::string(field) + "'", line);
    }
    return value;
}

/// Numeric CSV with one header row. Blank lines and lines starting with '#' are skipped.
inline Table parse(std::istream& in, std::size_t expected_columns = 0)
{
    Table table;
    std::string raw;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto fields = split(line);
        if (!have_header) {
            for (auto f : fields) {
                table.header.emplace_back(f);
            }
            if (expected_columns != 0 && table.header.size() != expected_columns) {
                throw ParseError("expected " + std::to_string(expected_columns) + " header columns", line_no);
            }
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw ParseError("expected " + std::to_string(table.header.size()) + " fields, got "
                                 + std::to_string(fields.size()),
                             line_no);
        }
        Row row{line_no, {}};
        row.values.reserve(fields.size());
        for (auto f : fields) {
            row.values.push_back(parse_double(f, line_no));
        }
        table.rows.push_back(std::move(row));
    }
    if (!have_header) {
        throw ParseError("empty CSV input", line_no);
    }
    return table;
}

inline Table read_file(const std::string& path, std::size_t expected_columns = 0)
{
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open '" + path + "'");
    }
    return parse(in, expected_columns);
}

inline Table parse_string(const std::string& text, std::size_t expected_columns = 0)
{
    std::istringstream in(text);
    return parse(in, expected_columns);
}

} // namespace hevlab::csv
