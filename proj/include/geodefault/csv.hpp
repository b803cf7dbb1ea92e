#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "geodefault/error.hpp"

namespace geodefault {

/// Parsed CSV with a header row. Rows are rectangular: every data row must
/// have as many fields as the header.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by header name; throws if the column is missing.
    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw_input("missing required column: " + name);
    }

    bool has_column(const std::string& name) const {
        for (const auto& h : header)
            if (h == name) return true;
        return false;
    }
};

namespace detail {

inline bool csv_take_record(std::string_view text, std::size_t& pos, std::size_t& line,
                            std::vector<std::string>& out, std::size_t* record_line = nullptr) {
    out.clear();
    const std::size_t n = text.size();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    if (record_line) *record_line = line;
    for (;;) {
        if (pos >= n) {
            if (in_quotes) throw_input("unterminated quoted field at line " + std::to_string(line));
            if (!any && field.empty() && out.empty()) return false; // nothing left but blanks
            out.push_back(std::move(field));
            return true;
        }
        const char c = text[pos];
        if (in_quotes) {
            if (c == '"') {
                if (pos + 1 < n && text[pos + 1] == '"') { field += '"'; pos += 2; }
                else { in_quotes = false; ++pos; }
            } else {
                if (c == '\n') ++line;
                field += c;
                ++pos;
            }
            continue;
        }
        switch (c) {
        case '"':
            if (!field.empty()) throw_input("quote inside unquoted field at line " + std::to_string(line));
            in_quotes = true;
            any = true;
            ++pos;
            break;
        case ',':
            out.push_back(std::move(field));
            field.clear();
            any = true;
            ++pos;
            break;
        case '\r':
            ++pos;
            break;
        case '\n':
            ++pos;
            ++line;
            if (!any && field.empty() && out.empty()) { // skip blank line
                if (record_line) *record_line = line;
                continue;
            }
            out.push_back(std::move(field));
            return true;
        default:
            field += c;
            any = true;
            ++pos;
        }
    }
}

} // namespace detail

inline CsvTable parse_csv(std::string_view text) {
    // Strip a UTF-8 BOM if present.
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

    CsvTable table;
    std::size_t pos = 0, line = 1, row_line = 1;
    std::vector<std::string> record;
    if (!detail::csv_take_record(text, pos, line, record, &row_line) || record.empty())
        throw_input("empty CSV: no header row");
    table.header = record;
    while (detail::csv_take_record(text, pos, line, record, &row_line)) {
        if (record.size() == 1 && record[0].empty()) continue; // explicitly quoted blank line
        if (record.size() != table.header.size())
            throw_input("row at line " + std::to_string(row_line) + " has " + std::to_string(record.size()) +
                        " fields, expected " + std::to_string(table.header.size()));
        table.rows.push_back(record);
    }
    return table;
}

inline std::string csv_escape(std::string_view field) {
    const bool needs_quotes = field.find_first_of(",\"\n\r") != std::string_view::npos;
    if (!needs_quotes) return std::string(field);
    std::string out;
    out.reserve(field.size() + 2);
    out += '"';
    for (const char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string csv_line(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_escape(fields[i]);
    }
    out += '\n';
    return out;
}

} // namespace geodefault
