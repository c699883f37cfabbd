#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "flowlab/packet.hpp"

namespace flowlab {

// Trace CSV contract. Header below, IPs dotted-quad, tcp_flags hex with a
// 0x prefix, LF line endings, no quoting. Timestamps must be non-decreasing.
inline constexpr const char* kTraceCsvHeader =
    "ts_us,src_ip,dst_ip,src_port,dst_port,proto,byte_len,tcp_flags";

// Parse errors carry the 1-based line number (header is line 1).
std::vector<PacketRecord> read_trace(const std::string& path);
std::vector<PacketRecord> read_trace(std::istream& in, const std::string& name);

// Validates every record before writing anything; read_trace(write_trace(r))
// reproduces r exactly.
void write_trace(const std::vector<PacketRecord>& records, const std::string& path);
void write_trace(const std::vector<PacketRecord>& records, std::ostream& out);

std::string format_packet_csv(const PacketRecord& p);

}  // namespace flowlab
