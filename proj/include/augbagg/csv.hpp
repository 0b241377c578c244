#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "augbagg/errors.hpp"

namespace augbagg {

// Shortest decimal representation that round-trips the double exactly.
inline std::string format_double(double value) {
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, result.ptr);
}

// Strict double parse: the whole field must be consumed and the value finite.
inline bool parse_double(const std::string& field, double& out) {
    const char* first = field.data();
    const char* last = first + field.size();
    const auto result = std::from_chars(first, last, out);
    return result.ec == std::errc{} && result.ptr == last && std::isfinite(out);
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (header[j] == name) return static_cast<int>(j);
        }
        return -1;
    }
};

namespace detail {

// One RFC-4180 record; handles quoted fields, doubled quotes, CR/LF endings.
// Returns false at end of input.
inline bool read_csv_record(std::istream& in, std::vector<std::string>& fields, std::size_t line_no) {
    fields.clear();
    int c = in.get();
    if (c == EOF) return false;
    std::string field;
    bool quoted = false;
    for (;;) {
        if (quoted) {
            if (c == EOF) throw format_error("csv: unterminated quoted field at line " + std::to_string(line_no));
            if (c == '"') {
                const int peek = in.peek();
                if (peek == '"') { field.push_back('"'); in.get(); }
                else quoted = false;
            } else {
                field.push_back(static_cast<char>(c));
            }
        } else {
            if (c == EOF || c == '\n') break;
            if (c == '\r') {
                if (in.peek() == '\n') in.get();
                break;
            }
            if (c == ',') { fields.push_back(std::move(field)); field.clear(); }
            else if (c == '"' && field.empty()) quoted = true;
            else field.push_back(static_cast<char>(c));
        }
        c = in.get();
    }
    fields.push_back(std::move(field));
    return true;
}

} // namespace detail

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open file: " + path);
    CsvTable table;
    std::vector<std::string> record;
    std::size_t line_no = 1;
    if (!detail::read_csv_record(in, table.header, line_no)) {
        throw format_error("csv: empty file: " + path);
    }
    while (detail::read_csv_record(in, record, ++line_no)) {
        if (record.size() == 1 && record[0].empty()) continue; // trailing blank line
        if (record.size() != table.header.size()) {
            throw format_error("csv: line " + std::to_string(line_no) + " has " +
                               std::to_string(record.size()) + " fields, expected " +
                               std::to_string(table.header.size()));
        }
        table.rows.push_back(record);
    }
    return table;
}

// Quotes only when necessary, per RFC 4180.
inline std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

inline void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) out << ',';
        out << csv_escape(fields[i]);
    }
    out << '\n';
}

// FNV-1a 64-bit content hash; used by run manifests.
inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write file: " + path);
    out << contents;
    if (!out) throw io_error("write failed: " + path);
}

} // namespace augbagg
