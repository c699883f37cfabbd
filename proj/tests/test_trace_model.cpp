#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <sstream>

#include "flowlab/rng.hpp"
#include "flowlab/synthetic.hpp"
#include "flowlab/trace_io.hpp"
#include "reference.hpp"
#include "test_util.hpp"

using namespace flowlab;

namespace {

std::vector<PacketRecord> parse(const std::string& body) {
    std::istringstream in(body);
    return read_trace(in, "test.csv");
}

std::string render(const std::vector<PacketRecord>& records) {
    std::ostringstream out;
    write_trace(records, out);
    return out.str();
}

}  // namespace

TEST_CASE("read_trace parses the documented row format") {
    const auto records = parse(
        "ts_us,src_ip,dst_ip,src_port,dst_port,proto,byte_len,tcp_flags\n"
        "1000,10.0.0.1,10.0.0.2,1234,80,6,1500,0x02\n");
    REQUIRE(records.size() == 1);
    CHECK(records[0].ts_us == 1000);
    CHECK(records[0].src_ip == 0x0A000001u);
    CHECK(records[0].dst_ip == 0x0A000002u);
    CHECK(records[0].src_port == 1234);
    CHECK(records[0].dst_port == 80);
    CHECK(records[0].proto == 6);
    CHECK(records[0].byte_len == 1500);
    CHECK(records[0].tcp_flags == kTcpSyn);
}

TEST_CASE("read_trace on a header-only file gives an empty sequence") {
    CHECK(parse("ts_us,src_ip,dst_ip,src_port,dst_port,proto,byte_len,tcp_flags\n").empty());
}

TEST_CASE("read_trace reports a timestamp regression with its line number") {
    const std::string body =
        "ts_us,src_ip,dst_ip,src_port,dst_port,proto,byte_len,tcp_flags\n"
        "2000,10.0.0.1,10.0.0.2,1,2,17,100,0x00\n"
        "1000,10.0.0.1,10.0.0.2,1,2,17,100,0x00\n";
    CHECK_THROWS_WITH_AS(parse(body), doctest::Contains("test.csv:3"), std::runtime_error);
}

TEST_CASE("read_trace rejects malformed rows with line numbers") {
    const std::string header = "ts_us,src_ip,dst_ip,src_port,dst_port,proto,byte_len,tcp_flags\n";
    SUBCASE("missing header") {
        CHECK_THROWS_WITH_AS(parse("1,2\n"), doctest::Contains("test.csv:1"), std::runtime_error);
    }
    SUBCASE("wrong column count") {
        CHECK_THROWS_WITH_AS(parse(header + "1000,10.0.0.1,10.0.0.2,1,2,17,100\n"),
                             doctest::Contains("test.csv:2"), std::runtime_error);
    }
    SUBCASE("unparsable ip") {
        CHECK_THROWS_WITH_AS(parse(header + "1000,10.0.0.999,10.0.0.2,1,2,17,100,0x00\n"),
                             doctest::Contains("src_ip"), std::runtime_error);
    }
    SUBCASE("port out of range") {
        CHECK_THROWS_AS(parse(header + "1000,10.0.0.1,10.0.0.2,70000,2,17,100,0x00\n"),
                        std::runtime_error);
    }
    SUBCASE("byte_len zero") {
        CHECK_THROWS_AS(parse(header + "1000,10.0.0.1,10.0.0.2,1,2,17,0,0x00\n"),
                        std::runtime_error);
    }
    SUBCASE("flags without 0x prefix") {
        CHECK_THROWS_AS(parse(header + "1000,10.0.0.1,10.0.0.2,1,2,6,100,10\n"),
                        std::runtime_error);
    }
    SUBCASE("flags on a non-TCP packet") {
        CHECK_THROWS_AS(parse(header + "1000,10.0.0.1,10.0.0.2,1,2,17,100,0x02\n"),
                        std::runtime_error);
    }
}

TEST_CASE("write_trace of an empty sequence is a header-only file") {
    CHECK(render({}) == std::string(kTraceCsvHeader) + "\n");
}

TEST_CASE("write_trace rejects invalid records before touching the file") {
    std::vector<PacketRecord> bad(2);
    bad[0] = PacketRecord{2000, 1, 2, 3, 4, kProtoUdp, 100, 0};
    bad[1] = PacketRecord{1000, 1, 2, 3, 4, kProtoUdp, 100, 0};
    const std::string path = (std::filesystem::temp_directory_path() / "flowlab_bad.csv").string();
    std::filesystem::remove(path);
    CHECK_THROWS_AS(write_trace(bad, path), std::invalid_argument);
    CHECK_FALSE(std::filesystem::exists(path));
}

TEST_CASE("trace round trip is the identity") {
    Rng rng(99);
    for (int iter = 0; iter < 100; ++iter) {
        const auto trace = testutil::make_random_trace(rng);
        const auto again = parse(render(trace));
        CHECK(again == trace);
    }
}

TEST_CASE("generator is deterministic for a fixed seed and config") {
    SyntheticConfig cfg;
    cfg.duration_s = 10;
    cfg.flow_arrival_rate = 0.2;
    cfg.seed = 7;
    const auto a = generate_synthetic(cfg);
    const auto b = generate_synthetic(cfg);
    CHECK(a == b);
    CHECK(render(a) == render(b));
}

TEST_CASE("parallel generator matches the serial reference byte for byte") {
    SyntheticConfig cfg;
    cfg.duration_s = 40;
    cfg.flow_arrival_rate = 25;
    cfg.seed = 21;
    CHECK(generate_synthetic(cfg) == ref::generate_synthetic(cfg));
}

TEST_CASE("heavy-tailed flow lengths: sample mean exceeds sample median") {
    // Direct draws with the documented primitive...
    Rng rng(11);
    std::vector<double> draws(10000);
    for (auto& d : draws) d = std::floor(rng.pareto(1.2, 1.0));
    std::vector<double> sorted = draws;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    double mean = 0;
    for (double d : draws) mean += d;
    mean /= static_cast<double>(draws.size());
    CHECK(mean > median);

    // ...and realized per-flow packet counts from a generated trace.
    SyntheticConfig cfg;
    cfg.duration_s = 100;
    cfg.flow_arrival_rate = 100;  // ~10^4 flows
    cfg.pareto_alpha = 1.2;
    cfg.pareto_xmin = 1;
    cfg.seed = 5;
    const auto trace = generate_synthetic(cfg);
    std::map<FlowKey, std::uint64_t> counts;
    for (const auto& p : trace) counts[key_of(p)] += 1;
    std::vector<double> realized;
    realized.reserve(counts.size());
    for (const auto& [k, c] : counts) realized.push_back(static_cast<double>(c));
    std::sort(realized.begin(), realized.end());
    const double rmedian = realized[realized.size() / 2];
    double rmean = 0;
    for (double c : realized) rmean += c;
    rmean /= static_cast<double>(realized.size());
    CHECK(realized.size() > 5000);
    CHECK(rmean > rmedian);
}

TEST_CASE("large_pkt_prob=1 makes every packet large") {
    SyntheticConfig cfg;
    cfg.duration_s = 5;
    cfg.flow_arrival_rate = 10;
    cfg.large_pkt_prob = 1.0;
    cfg.seed = 3;
    const auto trace = generate_synthetic(cfg);
    REQUIRE_FALSE(trace.empty());
    CHECK(std::all_of(trace.begin(), trace.end(),
                      [&](const PacketRecord& p) { return p.byte_len == cfg.pkt_size_large; }));
}

TEST_CASE("generated traces satisfy the record invariants across random configs") {
    Rng rng(2024);
    for (int iter = 0; iter < 100; ++iter) {
        SyntheticConfig cfg;
        cfg.duration_s = 1 + rng.uniform01() * 20;
        cfg.flow_arrival_rate = 0.5 + rng.uniform01() * 30;
        cfg.pareto_alpha = 0.8 + rng.uniform01() * 2.0;
        cfg.pareto_xmin = 1 + static_cast<std::uint32_t>(rng.below(3));
        cfg.large_pkt_prob = rng.uniform01();
        cfg.mean_ipg_ms = 1 + rng.uniform01() * 100;
        cfg.tcp_fraction = rng.uniform01();
        cfg.seed = rng.next_u64();
        const auto trace = generate_synthetic(cfg);

        const std::int64_t end_us = static_cast<std::int64_t>(cfg.duration_s * 1e6);
        std::map<FlowKey, const PacketRecord*> last_of_key;
        for (std::size_t i = 0; i < trace.size(); ++i) {
            const auto& p = trace[i];
            CHECK(check_packet(p) == std::nullopt);
            CHECK(p.ts_us >= 0);
            CHECK(p.ts_us < end_us);
            if (i > 0) CHECK(p.ts_us >= trace[i - 1].ts_us);
            last_of_key[key_of(p)] = &p;
        }
        // TCP flows end with FIN.
        for (const auto& [key, last] : last_of_key)
            if (key.proto == kProtoTcp) CHECK((last->tcp_flags & kTcpFin) != 0);
    }
}

TEST_CASE("generator rejects bad configs") {
    SyntheticConfig cfg;
    cfg.duration_s = 0;
    CHECK_THROWS_AS(generate_synthetic(cfg), std::invalid_argument);
    cfg.duration_s = 10;
    cfg.flow_arrival_rate = -1;
    CHECK_THROWS_AS(generate_synthetic(cfg), std::invalid_argument);
    cfg.flow_arrival_rate = 1;
    cfg.pareto_alpha = 0;
    CHECK_THROWS_AS(generate_synthetic(cfg), std::invalid_argument);
    cfg.pareto_alpha = 1.2;
    cfg.pareto_xmin = 0;
    CHECK_THROWS_AS(generate_synthetic(cfg), std::invalid_argument);
    cfg.pareto_xmin = 1;
    cfg.large_pkt_prob = 1.5;
    CHECK_THROWS_AS(generate_synthetic(cfg), std::invalid_argument);
}
