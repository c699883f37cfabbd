#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "flowlab/packet.hpp"

namespace flowlab {

// Flow-cache behaviour: timeouts, optional capacity pressure, TCP FIN/RST
// expiry. No capacity means the cache may grow without bound (relaxed-memory
// emulation).
struct CacheConfig {
    double inactive_timeout_s = 15.0;
    double active_timeout_s = 1800.0;
    std::optional<std::size_t> capacity;
    double high_watermark = 0.9;   // pressure kicks in above high_watermark * capacity
    double evict_fraction = 0.1;   // fraction of resident entries aged out per pressure event
    bool tcp_end_expiry = true;
};

void validate(const CacheConfig& config);

enum class ExportReason : std::uint8_t { inactive, active, tcp_end, pressure, flush };

const char* to_string(ExportReason r);
std::optional<ExportReason> parse_export_reason(std::string_view s);

// One exported flow.
struct FlowRecord {
    FlowKey key;
    std::int64_t first_ts_us = 0;
    std::int64_t last_ts_us = 0;
    std::uint64_t packets = 0;
    std::uint64_t bytes = 0;
    std::uint8_t flags_or = 0;
    ExportReason export_reason = ExportReason::flush;

    bool operator==(const FlowRecord&) const = default;
};

// Emulated flow cache. Expiry is evaluated lazily at each offered packet's
// timestamp, in this order:
//   1. entries idle >= inactive_timeout are exported (reason inactive);
//   2. entries aged >= active_timeout are exported (reason active);
//   3. the packet is merged into its entry, or creates one;
//   4. if the packet carries FIN or RST (and tcp_end_expiry), its flow is
//      exported immediately (reason tcp_end);
//   5. if occupancy exceeds high_watermark * capacity, the evict_fraction of
//      entries with the oldest last_ts_us are exported (reason pressure).
// Both timeout comparisons expire on boundary equality. Exports triggered by
// one offer are returned sorted by (first_ts_us, key).
//
// Instances are single-threaded; packets must arrive in non-decreasing
// timestamp order.
class FlowCache {
  public:
    explicit FlowCache(const CacheConfig& config);

    std::vector<FlowRecord> offer(const PacketRecord& packet);
    void offer(const PacketRecord& packet, std::vector<FlowRecord>& out);

    // Exports every resident entry (reason flush), sorted by
    // (first_ts_us, key); the cache is empty afterwards.
    std::vector<FlowRecord> flush();
    void flush(std::vector<FlowRecord>& out);

    std::size_t size() const { return map_.size(); }
    const CacheConfig& config() const { return config_; }

  private:
    struct Entry {
        FlowKey key;
        std::int64_t first_us = 0;
        std::int64_t last_us = 0;
        std::uint64_t packets = 0;
        std::uint64_t bytes = 0;
        std::uint8_t flags = 0;
        // intrusive list links; -1 = none
        std::int32_t last_prev = -1, last_next = -1;    // ordered by last_us
        std::int32_t first_prev = -1, first_next = -1;  // ordered by first_us
    };

    void expire_due(std::int64_t now_us, std::vector<FlowRecord>& out);
    void evict_pressure(std::vector<FlowRecord>& out);
    std::int32_t create_entry(const PacketRecord& p);
    FlowRecord export_entry(std::int32_t slot, ExportReason reason);
    void touch(std::int32_t slot);  // move to tail of the last_us list

    void list_push_back(std::int32_t Entry::* prev, std::int32_t Entry::* next,
                        std::int32_t& head, std::int32_t& tail, std::int32_t slot);
    void list_unlink(std::int32_t Entry::* prev, std::int32_t Entry::* next,
                     std::int32_t& head, std::int32_t& tail, std::int32_t slot);

    CacheConfig config_;
    std::int64_t inactive_us_ = 0;
    std::int64_t active_us_ = 0;
    std::int64_t last_offer_us_;
    bool saw_packet_ = false;

    std::unordered_map<FlowKey, std::int32_t, FlowKeyHash> map_;
    std::vector<Entry> arena_;
    std::vector<std::int32_t> free_slots_;
    std::int32_t last_head_ = -1, last_tail_ = -1;
    std::int32_t first_head_ = -1, first_tail_ = -1;
};

// offer() every packet in order, then flush().
std::vector<FlowRecord> build_flows(std::span<const PacketRecord> trace, const CacheConfig& config);

// Flow CSV contract (same conventions as the trace CSV).
inline constexpr const char* kFlowCsvHeader =
    "src_ip,dst_ip,src_port,dst_port,proto,first_ts_us,last_ts_us,packets,bytes,flags_or,export_reason";

void write_flows(const std::vector<FlowRecord>& flows, const std::string& path);
void write_flows(const std::vector<FlowRecord>& flows, std::ostream& out);
std::vector<FlowRecord> read_flows(const std::string& path);
std::vector<FlowRecord> read_flows(std::istream& in, const std::string& name);

}  // namespace flowlab
