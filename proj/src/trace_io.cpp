#include "flowlab/trace_io.hpp"

#include <fstream>
#include <stdexcept>

#include "flowlab/csv.hpp"

namespace flowlab {

namespace {

[[noreturn]] void fail_at(const std::string& name, std::size_t line, const std::string& what) {
    throw std::runtime_error(name + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

std::vector<PacketRecord> read_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open trace file: " + path);
    return read_trace(in, path);
}

std::vector<PacketRecord> read_trace(std::istream& in, const std::string& name) {
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) fail_at(name, 1, "missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTraceCsvHeader) fail_at(name, 1, "bad header, expected '" + std::string(kTraceCsvHeader) + "'");

    std::vector<PacketRecord> records;
    std::vector<std::string_view> f;
    std::int64_t prev_ts = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            if (in.peek() == EOF) break;  // tolerate one trailing newline
            fail_at(name, lineno, "empty row");
        }
        csv::split_fields(line, ',', f);
        if (f.size() != 8) fail_at(name, lineno, "expected 8 fields, got " + std::to_string(f.size()));

        PacketRecord p;
        if (!csv::parse_int(f[0], p.ts_us) || p.ts_us < 0) fail_at(name, lineno, "bad ts_us");
        if (!parse_ipv4(f[1], p.src_ip)) fail_at(name, lineno, "bad src_ip");
        if (!parse_ipv4(f[2], p.dst_ip)) fail_at(name, lineno, "bad dst_ip");
        if (!csv::parse_int(f[3], p.src_port)) fail_at(name, lineno, "bad src_port");
        if (!csv::parse_int(f[4], p.dst_port)) fail_at(name, lineno, "bad dst_port");
        if (!csv::parse_int(f[5], p.proto)) fail_at(name, lineno, "bad proto");
        if (!csv::parse_int(f[6], p.byte_len)) fail_at(name, lineno, "bad byte_len");
        if (!csv::parse_hex_byte(f[7], p.tcp_flags)) fail_at(name, lineno, "bad tcp_flags");
        if (auto err = check_packet(p)) fail_at(name, lineno, *err);
        if (!records.empty() && p.ts_us < prev_ts)
            fail_at(name, lineno, "timestamp regression: " + std::to_string(p.ts_us) + " after " +
                                      std::to_string(prev_ts));
        prev_ts = p.ts_us;
        records.push_back(p);
    }
    return records;
}

std::string format_packet_csv(const PacketRecord& p) {
    std::string s;
    s.reserve(64);
    s += std::to_string(p.ts_us);
    s += ',';
    s += format_ipv4(p.src_ip);
    s += ',';
    s += format_ipv4(p.dst_ip);
    s += ',';
    s += std::to_string(p.src_port);
    s += ',';
    s += std::to_string(p.dst_port);
    s += ',';
    s += std::to_string(p.proto);
    s += ',';
    s += std::to_string(p.byte_len);
    s += ',';
    s += csv::format_hex_byte(p.tcp_flags);
    return s;
}

namespace {

// Throws before a single byte is emitted if any record is invalid.
void validate_records(const std::vector<PacketRecord>& records) {
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (auto err = check_packet(records[i]))
            throw std::invalid_argument("record " + std::to_string(i) + ": " + *err);
        if (records[i].ts_us < 0)
            throw std::invalid_argument("record " + std::to_string(i) + ": negative ts_us");
        if (i > 0 && records[i].ts_us < records[i - 1].ts_us)
            throw std::invalid_argument("record " + std::to_string(i) + ": timestamp regression");
    }
}

}  // namespace

void write_trace(const std::vector<PacketRecord>& records, std::ostream& out) {
    validate_records(records);
    out << kTraceCsvHeader << '\n';
    std::string buf;
    for (const auto& p : records) {
        buf += format_packet_csv(p);
        buf += '\n';
        if (buf.size() > (1u << 20)) {
            out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
            buf.clear();
        }
    }
    if (!buf.empty()) out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    out.flush();
    if (!out) throw std::runtime_error("trace write failed");
}

void write_trace(const std::vector<PacketRecord>& records, const std::string& path) {
    validate_records(records);  // keep the file untouched on invalid input
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_trace(records, out);
    out.close();
    if (!out) throw std::runtime_error("trace write failed: " + path);
}

}  // namespace flowlab
