#pragma once

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ckms {

/// Shortest decimal form that parses back to the identical double. Keeps CSV
/// output byte-stable across runs and lossless on reload.
inline std::string format_double(double value) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

inline double parse_double_field(std::string_view field, const char* what) {
    double value{};
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw std::runtime_error(std::string("malformed ") + what + " field: '" +
                                 std::string(field) + "'");
    return value;
}

inline std::uint64_t parse_uint_field(std::string_view field, const char* what) {
    std::uint64_t value{};
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw std::runtime_error(std::string("malformed ") + what + " field: '" +
                                 std::string(field) + "'");
    return value;
}

}  // namespace ckms
