#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <sstream>

#include "flowlab/flow_cache.hpp"
#include "flowlab/rng.hpp"
#include "reference.hpp"
#include "test_util.hpp"

using namespace flowlab;

namespace {

PacketRecord pkt(std::int64_t ts_us, std::uint16_t src_port = 1000, std::uint8_t flags = 0,
                 std::uint16_t len = 100, std::uint8_t proto = kProtoTcp) {
    PacketRecord p;
    p.ts_us = ts_us;
    p.src_ip = 0x0A000001;
    p.dst_ip = 0x0A000002;
    p.src_port = src_port;
    p.dst_port = 80;
    p.proto = proto;
    p.byte_len = len;
    p.tcp_flags = proto == kProtoTcp ? flags : 0;
    return p;
}

CacheConfig timeouts_only() {
    CacheConfig c;
    c.tcp_end_expiry = false;
    return c;
}

}  // namespace

TEST_CASE("a 20s-idle entry is exported as inactive when its key recurs") {
    FlowCache cache(timeouts_only());
    CHECK(cache.offer(pkt(0)).empty());
    const auto exported = cache.offer(pkt(20'000'000));
    REQUIRE(exported.size() == 1);
    CHECK(exported[0].export_reason == ExportReason::inactive);
    CHECK(exported[0].packets == 1);
    CHECK(exported[0].first_ts_us == 0);
    CHECK(exported[0].last_ts_us == 0);
    // the recurring packet started a fresh entry
    const auto rest = cache.flush();
    REQUIRE(rest.size() == 1);
    CHECK(rest[0].first_ts_us == 20'000'000);
    CHECK(rest[0].packets == 1);
}

TEST_CASE("idle exactly equal to the timeout expires") {
    FlowCache cache(timeouts_only());
    cache.offer(pkt(0));
    const auto exported = cache.offer(pkt(15'000'000, 2000));  // other key triggers the scan
    REQUIRE(exported.size() == 1);
    CHECK(exported[0].export_reason == ExportReason::inactive);
}

TEST_CASE("FIN and RST expire the flow immediately") {
    for (std::uint8_t end_flag : {kTcpFin, kTcpRst}) {
        FlowCache cache{CacheConfig{}};
        cache.offer(pkt(0));
        const auto exported = cache.offer(pkt(1000, 1000, end_flag));
        REQUIRE(exported.size() == 1);
        CHECK(exported[0].export_reason == ExportReason::tcp_end);
        CHECK(exported[0].packets == 2);  // the FIN packet is part of the record
        CHECK((exported[0].flags_or & end_flag) != 0);
        CHECK(cache.size() == 0);
    }
}

TEST_CASE("tcp_end_expiry off leaves FIN-carrying flows resident") {
    FlowCache cache(timeouts_only());
    cache.offer(pkt(0));
    CHECK(cache.offer(pkt(1000, 1000, kTcpFin)).empty());
    CHECK(cache.size() == 1);
}

TEST_CASE("a long-lived flow is force-exported as active") {
    FlowCache cache(timeouts_only());
    std::vector<FlowRecord> exported;
    for (std::int64_t t = 0; t <= 35 * 60; t += 10) cache.offer(pkt(t * 1'000'000), exported);
    cache.flush(exported);

    bool saw_active = false;
    for (const auto& r : exported) {
        if (r.export_reason == ExportReason::active) saw_active = true;
        // non-active records stay under the active timeout
        if (r.export_reason != ExportReason::active)
            CHECK(r.last_ts_us - r.first_ts_us < 1800 * 1'000'000ll);
    }
    CHECK(saw_active);

    std::uint64_t total = 0;
    for (const auto& r : exported) total += r.packets;
    CHECK(total == 35 * 6 + 1);
}

TEST_CASE("flush exports everything and empties the cache") {
    FlowCache cache{CacheConfig{}};
    CHECK(cache.flush().empty());
    cache.offer(pkt(0, 1000));
    cache.offer(pkt(0, 1001));
    cache.offer(pkt(0, 1002));
    const auto flushed = cache.flush();
    CHECK(flushed.size() == 3);
    CHECK(cache.size() == 0);
    for (const auto& r : flushed) CHECK(r.export_reason == ExportReason::flush);
}

TEST_CASE("five same-key packets within a second give one record of five") {
    const std::vector<PacketRecord> trace = {pkt(0), pkt(100), pkt(5000), pkt(600000), pkt(999999)};
    const auto flows = build_flows(trace, timeouts_only());
    REQUIRE(flows.size() == 1);
    CHECK(flows[0].packets == 5);
    CHECK(flows[0].bytes == 500);
}

TEST_CASE("interleaved keys produce per-key totals matching a grouping oracle") {
    std::vector<PacketRecord> trace;
    for (int i = 0; i < 40; ++i) trace.push_back(pkt(i * 1000, i % 2 ? 1000 : 2000, 0, 50 + i));
    const auto flows = build_flows(trace, timeouts_only());
    const auto oracle = ref::group_flows(trace);
    REQUIRE(flows.size() == 2);
    REQUIRE(oracle.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(flows[i].key == oracle[i].key);
        CHECK(flows[i].packets == oracle[i].packets);
        CHECK(flows[i].bytes == oracle[i].bytes);
    }
}

TEST_CASE("with no expiry pressure build_flows equals naive grouping") {
    Rng rng(71);
    CacheConfig cfg;
    cfg.inactive_timeout_s = 1e6;
    cfg.active_timeout_s = 2e6;
    cfg.tcp_end_expiry = false;
    for (int iter = 0; iter < 200; ++iter) {
        const auto trace = testutil::make_random_trace(rng);
        CHECK(build_flows(trace, cfg) == ref::group_flows(trace));
    }
}

TEST_CASE("packets and bytes are conserved under every config") {
    Rng rng(72);
    for (int iter = 0; iter < 150; ++iter) {
        const auto trace = testutil::make_random_trace(rng);
        CacheConfig cfg;
        cfg.inactive_timeout_s = 0.01 + rng.uniform01() * 20;
        cfg.active_timeout_s = cfg.inactive_timeout_s + 0.01 + rng.uniform01() * 60;
        cfg.tcp_end_expiry = rng.bernoulli(0.5);
        if (rng.bernoulli(0.5)) cfg.capacity = 8;
        const auto flows = build_flows(trace, cfg);

        const auto active_us = static_cast<std::int64_t>(cfg.active_timeout_s * 1e6);
        std::uint64_t packets = 0, bytes = 0, traced_bytes = 0;
        for (const auto& r : flows) {
            packets += r.packets;
            bytes += r.bytes;
            CHECK(r.first_ts_us <= r.last_ts_us);
            CHECK(r.bytes >= r.packets);
            if (r.export_reason != ExportReason::active)
                CHECK(r.last_ts_us - r.first_ts_us < active_us);
        }
        for (const auto& p : trace) traced_bytes += p.byte_len;
        CHECK(packets == trace.size());
        CHECK(bytes == traced_bytes);
    }
}

TEST_CASE("decreasing the inactive timeout never merges records") {
    Rng rng(73);
    for (int iter = 0; iter < 100; ++iter) {
        const auto trace = testutil::make_random_trace(rng);
        CacheConfig small = timeouts_only(), big = timeouts_only();
        small.inactive_timeout_s = 1 + rng.uniform01() * 10;
        big.inactive_timeout_s = small.inactive_timeout_s + rng.uniform01() * 20;
        small.active_timeout_s = big.active_timeout_s = 3600;
        CHECK(build_flows(trace, small).size() >= build_flows(trace, big).size());
    }
}

TEST_CASE("an inactive export is followed by a sufficiently late restart") {
    Rng rng(74);
    const CacheConfig cfg = timeouts_only();
    const auto inactive_us = static_cast<std::int64_t>(cfg.inactive_timeout_s * 1e6);
    for (int iter = 0; iter < 50; ++iter) {
        const auto trace = testutil::make_random_trace(rng);
        auto flows = build_flows(trace, cfg);
        std::map<FlowKey, std::vector<const FlowRecord*>> by_key;
        for (const auto& r : flows) by_key[r.key].push_back(&r);
        for (auto& [key, records] : by_key) {
            for (std::size_t i = 0; i + 1 < records.size(); ++i)
                if (records[i]->export_reason == ExportReason::inactive)
                    CHECK(records[i + 1]->first_ts_us - records[i]->last_ts_us >= inactive_us);
        }
    }
}

TEST_CASE("occupancy never exceeds a configured capacity") {
    Rng rng(75);
    CacheConfig cfg;
    cfg.capacity = 8;
    for (int iter = 0; iter < 50; ++iter) {
        testutil::RandomTraceOpts opts;
        opts.min_keys = 16;  // enough distinct keys to cross the watermark
        opts.max_keys = 40;
        opts.max_gap_us = 100'000;  // keep everything resident so pressure kicks in
        const auto trace = testutil::make_random_trace(rng, opts);
        FlowCache cache(cfg);
        std::vector<FlowRecord> out;
        bool saw_pressure = false;
        for (const auto& p : trace) {
            cache.offer(p, out);
            CHECK(cache.size() <= 8);
        }
        for (const auto& r : out) saw_pressure |= r.export_reason == ExportReason::pressure;
        if (trace.size() > 100) CHECK(saw_pressure);
    }
}

TEST_CASE("out-of-order offers are rejected") {
    FlowCache cache{CacheConfig{}};
    cache.offer(pkt(1000));
    CHECK_THROWS_AS(cache.offer(pkt(999)), std::invalid_argument);

    std::vector<PacketRecord> unsorted = {pkt(1000), pkt(500)};
    CHECK_THROWS_AS(build_flows(unsorted, CacheConfig{}), std::invalid_argument);
}

TEST_CASE("exports within one offer come out ordered by first_ts then key") {
    CacheConfig cfg = timeouts_only();
    FlowCache cache(cfg);
    // Three entries born at distinct times, all idle once a late packet shows up.
    cache.offer(pkt(0, 3000));
    cache.offer(pkt(1000, 1000));
    cache.offer(pkt(2000, 2000));
    const auto exported = cache.offer(pkt(60'000'000, 4000));
    REQUIRE(exported.size() == 3);
    CHECK(exported[0].first_ts_us == 0);
    CHECK(exported[1].first_ts_us == 1000);
    CHECK(exported[2].first_ts_us == 2000);
}

TEST_CASE("flow csv round-trips") {
    Rng rng(76);
    const auto trace = testutil::make_random_trace(rng);
    const auto flows = build_flows(trace, CacheConfig{});
    std::ostringstream out;
    write_flows(flows, out);
    std::istringstream in(out.str());
    CHECK(read_flows(in, "flows.csv") == flows);
}

TEST_CASE("flow csv rejects unknown export reasons") {
    std::istringstream in(
        std::string(kFlowCsvHeader) + "\n" +
        "10.0.0.1,10.0.0.2,1,2,6,0,10,1,100,0x00,sideways\n");
    CHECK_THROWS_WITH_AS(read_flows(in, "flows.csv"), doctest::Contains("flows.csv:2"),
                         std::runtime_error);
}

TEST_CASE("config validation") {
    CacheConfig cfg;
    cfg.inactive_timeout_s = 0;
    CHECK_THROWS_AS(FlowCache{cfg}, std::invalid_argument);
    cfg = CacheConfig{};
    cfg.active_timeout_s = cfg.inactive_timeout_s;
    CHECK_THROWS_AS(FlowCache{cfg}, std::invalid_argument);
    cfg = CacheConfig{};
    cfg.evict_fraction = 1.0;
    CHECK_THROWS_AS(FlowCache{cfg}, std::invalid_argument);
}
