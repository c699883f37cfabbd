#include "flowlab/flow_cache.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "flowlab/csv.hpp"

namespace flowlab {

void validate(const CacheConfig& c) {
    if (!(c.inactive_timeout_s > 0)) throw std::invalid_argument("inactive_timeout_s must be > 0");
    if (!(c.active_timeout_s > c.inactive_timeout_s))
        throw std::invalid_argument("active_timeout_s must exceed inactive_timeout_s");
    if (!(c.high_watermark > 0 && c.high_watermark <= 1))
        throw std::invalid_argument("high_watermark must be in (0, 1]");
    if (!(c.evict_fraction > 0 && c.evict_fraction < 1))
        throw std::invalid_argument("evict_fraction must be in (0, 1)");
    if (c.capacity && *c.capacity < 1) throw std::invalid_argument("capacity must be >= 1");
}

const char* to_string(ExportReason r) {
    switch (r) {
        case ExportReason::inactive: return "inactive";
        case ExportReason::active: return "active";
        case ExportReason::tcp_end: return "tcp_end";
        case ExportReason::pressure: return "pressure";
        case ExportReason::flush: return "flush";
    }
    return "?";
}

std::optional<ExportReason> parse_export_reason(std::string_view s) {
    if (s == "inactive") return ExportReason::inactive;
    if (s == "active") return ExportReason::active;
    if (s == "tcp_end") return ExportReason::tcp_end;
    if (s == "pressure") return ExportReason::pressure;
    if (s == "flush") return ExportReason::flush;
    return std::nullopt;
}

namespace {

std::int64_t seconds_to_us(double s) {
    return static_cast<std::int64_t>(std::llround(s * 1e6));
}

bool record_order(const FlowRecord& a, const FlowRecord& b) {
    if (a.first_ts_us != b.first_ts_us) return a.first_ts_us < b.first_ts_us;
    return a.key < b.key;
}

}  // namespace

FlowCache::FlowCache(const CacheConfig& config)
    : config_(config), last_offer_us_(std::numeric_limits<std::int64_t>::min()) {
    validate(config_);
    inactive_us_ = seconds_to_us(config_.inactive_timeout_s);
    active_us_ = seconds_to_us(config_.active_timeout_s);
}

void FlowCache::list_push_back(std::int32_t Entry::* prev, std::int32_t Entry::* next,
                               std::int32_t& head, std::int32_t& tail, std::int32_t slot) {
    Entry& e = arena_[static_cast<std::size_t>(slot)];
    e.*prev = tail;
    e.*next = -1;
    if (tail >= 0)
        arena_[static_cast<std::size_t>(tail)].*next = slot;
    else
        head = slot;
    tail = slot;
}

void FlowCache::list_unlink(std::int32_t Entry::* prev, std::int32_t Entry::* next,
                            std::int32_t& head, std::int32_t& tail, std::int32_t slot) {
    Entry& e = arena_[static_cast<std::size_t>(slot)];
    if (e.*prev >= 0)
        arena_[static_cast<std::size_t>(e.*prev)].*next = e.*next;
    else
        head = e.*next;
    if (e.*next >= 0)
        arena_[static_cast<std::size_t>(e.*next)].*prev = e.*prev;
    else
        tail = e.*prev;
    e.*prev = e.*next = -1;
}

std::int32_t FlowCache::create_entry(const PacketRecord& p) {
    std::int32_t slot;
    if (!free_slots_.empty()) {
        slot = free_slots_.back();
        free_slots_.pop_back();
    } else {
        if (arena_.size() >= static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max()))
            throw std::runtime_error("flow cache arena overflow");
        slot = static_cast<std::int32_t>(arena_.size());
        arena_.emplace_back();
    }
    Entry& e = arena_[static_cast<std::size_t>(slot)];
    e = Entry{};
    e.key = key_of(p);
    e.first_us = e.last_us = p.ts_us;
    e.packets = 1;
    e.bytes = p.byte_len;
    e.flags = p.tcp_flags;
    map_.emplace(e.key, slot);
    list_push_back(&Entry::last_prev, &Entry::last_next, last_head_, last_tail_, slot);
    list_push_back(&Entry::first_prev, &Entry::first_next, first_head_, first_tail_, slot);
    return slot;
}

FlowRecord FlowCache::export_entry(std::int32_t slot, ExportReason reason) {
    Entry& e = arena_[static_cast<std::size_t>(slot)];
    FlowRecord r{e.key, e.first_us, e.last_us, e.packets, e.bytes, e.flags, reason};
    list_unlink(&Entry::last_prev, &Entry::last_next, last_head_, last_tail_, slot);
    list_unlink(&Entry::first_prev, &Entry::first_next, first_head_, first_tail_, slot);
    map_.erase(e.key);
    free_slots_.push_back(slot);
    return r;
}

void FlowCache::touch(std::int32_t slot) {
    list_unlink(&Entry::last_prev, &Entry::last_next, last_head_, last_tail_, slot);
    list_push_back(&Entry::last_prev, &Entry::last_next, last_head_, last_tail_, slot);
}

void FlowCache::expire_due(std::int64_t now_us, std::vector<FlowRecord>& out) {
    // Packets arrive in time order, so the last_us list is sorted and the
    // idle scan stops at the first young entry; likewise for first_us.
    while (last_head_ >= 0) {
        const Entry& e = arena_[static_cast<std::size_t>(last_head_)];
        if (now_us - e.last_us < inactive_us_) break;
        out.push_back(export_entry(last_head_, ExportReason::inactive));
    }
    while (first_head_ >= 0) {
        const Entry& e = arena_[static_cast<std::size_t>(first_head_)];
        if (now_us - e.first_us < active_us_) break;
        out.push_back(export_entry(first_head_, ExportReason::active));
    }
}

void FlowCache::evict_pressure(std::vector<FlowRecord>& out) {
    if (!config_.capacity) return;
    const double cap = static_cast<double>(*config_.capacity);
    if (static_cast<double>(map_.size()) <= config_.high_watermark * cap) return;
    auto to_evict = static_cast<std::size_t>(
        std::ceil(config_.evict_fraction * static_cast<double>(map_.size())));
    to_evict = std::max<std::size_t>(to_evict, 1);
    for (std::size_t i = 0; i < to_evict && last_head_ >= 0; ++i)
        out.push_back(export_entry(last_head_, ExportReason::pressure));
}

void FlowCache::offer(const PacketRecord& packet, std::vector<FlowRecord>& out) {
    if (saw_packet_ && packet.ts_us < last_offer_us_)
        throw std::invalid_argument("offer: packets must arrive in non-decreasing ts_us order");
    saw_packet_ = true;
    last_offer_us_ = packet.ts_us;

    const std::size_t before = out.size();
    expire_due(packet.ts_us, out);

    auto it = map_.find(key_of(packet));
    std::int32_t slot;
    if (it != map_.end()) {
        slot = it->second;
        Entry& e = arena_[static_cast<std::size_t>(slot)];
        e.last_us = packet.ts_us;
        e.packets += 1;
        e.bytes += packet.byte_len;
        e.flags |= packet.tcp_flags;
        touch(slot);
    } else {
        slot = create_entry(packet);
    }

    if (config_.tcp_end_expiry && packet.proto == kProtoTcp &&
        (packet.tcp_flags & (kTcpFin | kTcpRst)) != 0)
        out.push_back(export_entry(slot, ExportReason::tcp_end));

    evict_pressure(out);
    std::sort(out.begin() + static_cast<std::ptrdiff_t>(before), out.end(), record_order);
}

std::vector<FlowRecord> FlowCache::offer(const PacketRecord& packet) {
    std::vector<FlowRecord> out;
    offer(packet, out);
    return out;
}

void FlowCache::flush(std::vector<FlowRecord>& out) {
    const std::size_t before = out.size();
    while (first_head_ >= 0) out.push_back(export_entry(first_head_, ExportReason::flush));
    std::sort(out.begin() + static_cast<std::ptrdiff_t>(before), out.end(), record_order);
}

std::vector<FlowRecord> FlowCache::flush() {
    std::vector<FlowRecord> out;
    flush(out);
    return out;
}

std::vector<FlowRecord> build_flows(std::span<const PacketRecord> trace, const CacheConfig& config) {
    for (std::size_t i = 1; i < trace.size(); ++i)
        if (trace[i].ts_us < trace[i - 1].ts_us)
            throw std::invalid_argument("build_flows: trace not sorted at record " + std::to_string(i));
    FlowCache cache(config);
    std::vector<FlowRecord> out;
    for (const auto& p : trace) cache.offer(p, out);
    cache.flush(out);
    return out;
}

void write_flows(const std::vector<FlowRecord>& flows, std::ostream& out) {
    out << kFlowCsvHeader << '\n';
    std::string buf;
    for (const auto& r : flows) {
        buf += format_ipv4(r.key.src_ip);
        buf += ',';
        buf += format_ipv4(r.key.dst_ip);
        buf += ',';
        buf += std::to_string(r.key.src_port);
        buf += ',';
        buf += std::to_string(r.key.dst_port);
        buf += ',';
        buf += std::to_string(r.key.proto);
        buf += ',';
        buf += std::to_string(r.first_ts_us);
        buf += ',';
        buf += std::to_string(r.last_ts_us);
        buf += ',';
        buf += std::to_string(r.packets);
        buf += ',';
        buf += std::to_string(r.bytes);
        buf += ',';
        buf += csv::format_hex_byte(r.flags_or);
        buf += ',';
        buf += to_string(r.export_reason);
        buf += '\n';
        if (buf.size() > (1u << 20)) {
            out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
            buf.clear();
        }
    }
    if (!buf.empty()) out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    out.flush();
    if (!out) throw std::runtime_error("flow write failed");
}

void write_flows(const std::vector<FlowRecord>& flows, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_flows(flows, out);
}

std::vector<FlowRecord> read_flows(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open flow file: " + path);
    return read_flows(in, path);
}

std::vector<FlowRecord> read_flows(std::istream& in, const std::string& name) {
    auto fail = [&name](std::size_t line, const std::string& what) -> void {
        throw std::runtime_error(name + ":" + std::to_string(line) + ": " + what);
    };
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) fail(1, "missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kFlowCsvHeader) fail(1, "bad header, expected '" + std::string(kFlowCsvHeader) + "'");

    std::vector<FlowRecord> flows;
    std::vector<std::string_view> f;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            if (in.peek() == EOF) break;
            fail(lineno, "empty row");
        }
        csv::split_fields(line, ',', f);
        if (f.size() != 11) fail(lineno, "expected 11 fields, got " + std::to_string(f.size()));
        FlowRecord r;
        if (!parse_ipv4(f[0], r.key.src_ip)) fail(lineno, "bad src_ip");
        if (!parse_ipv4(f[1], r.key.dst_ip)) fail(lineno, "bad dst_ip");
        if (!csv::parse_int(f[2], r.key.src_port)) fail(lineno, "bad src_port");
        if (!csv::parse_int(f[3], r.key.dst_port)) fail(lineno, "bad dst_port");
        if (!csv::parse_int(f[4], r.key.proto)) fail(lineno, "bad proto");
        if (!csv::parse_int(f[5], r.first_ts_us)) fail(lineno, "bad first_ts_us");
        if (!csv::parse_int(f[6], r.last_ts_us)) fail(lineno, "bad last_ts_us");
        if (!csv::parse_int(f[7], r.packets)) fail(lineno, "bad packets");
        if (!csv::parse_int(f[8], r.bytes)) fail(lineno, "bad bytes");
        if (!csv::parse_hex_byte(f[9], r.flags_or)) fail(lineno, "bad flags_or");
        auto reason = parse_export_reason(f[10]);
        if (!reason) fail(lineno, "bad export_reason");
        r.export_reason = *reason;
        if (r.first_ts_us > r.last_ts_us) fail(lineno, "first_ts_us > last_ts_us");
        if (r.packets < 1) fail(lineno, "packets must be >= 1");
        if (r.bytes < r.packets) fail(lineno, "bytes must be >= packets");
        flows.push_back(r);
    }
    return flows;
}

}  // namespace flowlab
