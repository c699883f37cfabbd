#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace flowlab::csv {

// Shortest round-trippable decimal form (std::to_chars). Keeps report files
// deterministic and diffable.
inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw std::runtime_error("format_double failed");
    return std::string(buf, ptr);
}

// "NA" marks an undefined value; never emitted as 0 or nan.
inline std::string format_opt(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("NA");
}

inline void split_fields(std::string_view line, char delim, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

inline bool parse_double(std::string_view s, double& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

// Hex byte with mandatory 0x prefix, e.g. "0x02".
inline bool parse_hex_byte(std::string_view s, std::uint8_t& out) {
    if (s.size() < 3 || s.size() > 4 || s[0] != '0' || (s[1] != 'x' && s[1] != 'X')) return false;
    unsigned v = 0;
    auto [ptr, ec] = std::from_chars(s.data() + 2, s.data() + s.size(), v, 16);
    if (ec != std::errc() || ptr != s.data() + s.size() || v > 0xff) return false;
    out = static_cast<std::uint8_t>(v);
    return true;
}

inline std::string format_hex_byte(std::uint8_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s = "0x00";
    s[2] = digits[v >> 4];
    s[3] = digits[v & 0xf];
    return s;
}

}  // namespace flowlab::csv
