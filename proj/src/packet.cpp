#include "flowlab/packet.hpp"

#include <charconv>
#include <string_view>

namespace flowlab {

std::string format_ipv4(std::uint32_t ip) {
    char buf[16];
    char* p = buf;
    for (int shift = 24; shift >= 0; shift -= 8) {
        const unsigned octet = (ip >> shift) & 0xff;
        if (octet >= 100) *p++ = static_cast<char>('0' + octet / 100);
        if (octet >= 10) *p++ = static_cast<char>('0' + (octet / 10) % 10);
        *p++ = static_cast<char>('0' + octet % 10);
        if (shift > 0) *p++ = '.';
    }
    return std::string(buf, p);
}

bool parse_ipv4(std::string_view s, std::uint32_t& out) {
    std::uint32_t ip = 0;
    const char* p = s.data();
    const char* end = s.data() + s.size();
    for (int i = 0; i < 4; ++i) {
        unsigned octet = 0;
        auto res = std::from_chars(p, end, octet);
        if (res.ec != std::errc() || octet > 255) return false;
        if (res.ptr - p > 3) return false;
        p = res.ptr;
        ip = (ip << 8) | octet;
        if (i < 3) {
            if (p == end || *p != '.') return false;
            ++p;
        }
    }
    if (p != end) return false;
    out = ip;
    return true;
}

std::optional<std::string> check_packet(const PacketRecord& p) {
    if (p.byte_len < 1) return "byte_len must be >= 1";
    if (p.proto != kProtoTcp && p.tcp_flags != 0) return "tcp_flags must be 0 when proto != 6";
    return std::nullopt;
}

}  // namespace flowlab
