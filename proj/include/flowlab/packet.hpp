#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>

namespace flowlab {

// TCP flag bits (RFC 793 low byte).
inline constexpr std::uint8_t kTcpFin = 0x01;
inline constexpr std::uint8_t kTcpSyn = 0x02;
inline constexpr std::uint8_t kTcpRst = 0x04;
inline constexpr std::uint8_t kTcpPsh = 0x08;
inline constexpr std::uint8_t kTcpAck = 0x10;

inline constexpr std::uint8_t kProtoTcp = 6;
inline constexpr std::uint8_t kProtoUdp = 17;

// One observed packet. Timestamps are microseconds since the trace epoch;
// byte_len is the IP-layer length in octets.
struct PacketRecord {
    std::int64_t ts_us = 0;
    std::uint32_t src_ip = 0;
    std::uint32_t dst_ip = 0;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    std::uint8_t proto = 0;
    std::uint16_t byte_len = 0;
    std::uint8_t tcp_flags = 0;

    bool operator==(const PacketRecord&) const = default;
};

// Unidirectional 5-tuple flow identity. a->b and b->a are distinct.
struct FlowKey {
    std::uint32_t src_ip = 0;
    std::uint32_t dst_ip = 0;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    std::uint8_t proto = 0;

    bool operator==(const FlowKey&) const = default;

    friend bool operator<(const FlowKey& a, const FlowKey& b) {
        return std::tie(a.src_ip, a.dst_ip, a.src_port, a.dst_port, a.proto) <
               std::tie(b.src_ip, b.dst_ip, b.src_port, b.dst_port, b.proto);
    }
};

inline FlowKey key_of(const PacketRecord& p) {
    return FlowKey{p.src_ip, p.dst_ip, p.src_port, p.dst_port, p.proto};
}

struct FlowKeyHash {
    std::size_t operator()(const FlowKey& k) const {
        // FNV-1a over the five fields.
        std::uint64_t h = 0xcbf29ce484222325ull;
        auto mix = [&h](std::uint64_t v, int bytes) {
            for (int i = 0; i < bytes; ++i) {
                h ^= (v >> (8 * i)) & 0xff;
                h *= 0x100000001b3ull;
            }
        };
        mix(k.src_ip, 4);
        mix(k.dst_ip, 4);
        mix(k.src_port, 2);
        mix(k.dst_port, 2);
        mix(k.proto, 1);
        return static_cast<std::size_t>(h);
    }
};

std::string format_ipv4(std::uint32_t ip);
bool parse_ipv4(std::string_view s, std::uint32_t& out);

// Returns a description of the first violated record invariant, or nullopt.
std::optional<std::string> check_packet(const PacketRecord& p);

}  // namespace flowlab
