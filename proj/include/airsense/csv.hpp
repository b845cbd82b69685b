#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "airsense/errors.hpp"

// Minimal CSV plumbing shared by every file format in the data root. Fields
// never contain commas or quotes in our schemas, so no quoting is supported;
// writers reject values that would need it.
namespace airsense::csv {

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

inline std::optional<double> to_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

inline std::optional<std::int64_t> to_int64(std::string_view s) {
    s = trim(s);
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw ArgumentError("cannot format number");
    return std::string(buf, ptr);
}

inline void check_cell(std::string_view s, std::string_view field) {
    if (s.find_first_of(",\n\r\"") != std::string_view::npos) {
        throw ArgumentError("value for '" + std::string(field) +
                            "' contains a delimiter: " + std::string(s));
    }
}

// Reads lines, skipping blank lines and '#' comments, and tracks the 1-based
// physical line number.
class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    bool next(std::string& line) {
        while (std::getline(in_, line)) {
            ++line_no_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            const auto t = trim(line);
            if (t.empty() || t.front() == '#') continue;
            return true;
        }
        return false;
    }

    std::size_t line_no() const { return line_no_; }

private:
    std::istream& in_;
    std::size_t line_no_ = 0;
};

// Consumes the header line and checks it against `expected` exactly.
inline void expect_header(LineReader& reader, std::string_view expected, std::string_view what) {
    std::string line;
    if (!reader.next(line)) {
        throw FormatError(std::string(what) + ": missing header, expected '" +
                          std::string(expected) + "'");
    }
    if (trim(line) != expected) {
        throw FormatError(std::string(what) + ": header '" + line + "' does not match '" +
                          std::string(expected) + "'");
    }
}

// Per-line problems collected while parsing in lenient mode.
template <typename Record>
struct ParseResult {
    std::vector<Record> records;
    std::vector<ValidationError> errors;

    bool ok() const { return errors.empty(); }

    // Throws the first collected error, if any.
    const std::vector<Record>& value() const {
        if (!errors.empty()) throw errors.front();
        return records;
    }
};

}  // namespace airsense::csv
