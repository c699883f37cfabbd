#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "flowlab/distributions.hpp"
#include "flowlab/rng.hpp"
#include "reference.hpp"

using namespace flowlab;

namespace {

std::vector<double> vec(std::initializer_list<double> xs) { return std::vector<double>(xs); }

FlowRecord flow_of(std::uint64_t packets, std::uint64_t bytes, std::int64_t first_us = 0) {
    FlowRecord r;
    r.key.src_port = static_cast<std::uint16_t>(first_us % 60000 + packets);
    r.first_ts_us = first_us;
    r.last_ts_us = first_us;
    r.packets = packets;
    r.bytes = bytes;
    return r;
}

}  // namespace

TEST_CASE("ecdf of a single sample is one step at probability 1") {
    const auto e = ecdf(vec({5}));
    REQUIRE(e.points.size() == 1);
    CHECK(e.points[0].first == 5.0);
    CHECK(e.points[0].second == 1.0);
    CHECK(e.n == 1);
}

TEST_CASE("ecdf merges ties into cumulative steps") {
    const auto e = ecdf(vec({1, 1, 2}));
    REQUIRE(e.points.size() == 2);
    CHECK(e.points[0] == std::pair{1.0, 2.0 / 3.0});
    CHECK(e.points[1] == std::pair{2.0, 1.0});
}

TEST_CASE("ecdf rejects empty input") {
    CHECK_THROWS_AS(ecdf({}), std::invalid_argument);
}

TEST_CASE("ecdf ends at exactly 1 and is strictly increasing") {
    Rng rng(91);
    for (int iter = 0; iter < 50; ++iter) {
        std::vector<double> xs(1 + rng.below(300));
        for (auto& x : xs) x = std::floor(rng.uniform01() * 50);  // heavy ties
        const auto e = ecdf(xs);
        CHECK(e.points.back().second == 1.0);
        for (std::size_t i = 1; i < e.points.size(); ++i) {
            CHECK(e.points[i].first > e.points[i - 1].first);
            CHECK(e.points[i].second > e.points[i - 1].second);
        }
    }
}

TEST_CASE("ecdf of a doubled sample is unchanged") {
    Rng rng(92);
    std::vector<double> xs(200);
    for (auto& x : xs) x = std::floor(rng.uniform01() * 30);
    std::vector<double> doubled = xs;
    doubled.insert(doubled.end(), xs.begin(), xs.end());
    const auto a = ecdf(xs);
    const auto b = ecdf(doubled);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        CHECK(a.points[i].first == b.points[i].first);
        CHECK(a.points[i].second == b.points[i].second);
    }
}

TEST_CASE("an ecdf of uniform draws stays within 0.05 of the line") {
    for (std::uint64_t seed : {1, 2, 3}) {
        Rng rng(seed);
        std::vector<double> xs(10000);
        for (auto& x : xs) x = rng.uniform01();
        const auto e = ecdf(xs);
        double worst = 0;
        double prev = 0;
        for (const auto& [v, p] : e.points) {
            worst = std::max(worst, std::abs(p - v));
            worst = std::max(worst, std::abs(prev - v));
            prev = p;
        }
        CHECK(worst < 0.05);
    }
}

TEST_CASE("ks_statistic on identical samples is zero") {
    const auto e = ecdf(vec({3, 1, 4, 1, 5}));
    CHECK(ks_statistic(e, e) == 0.0);
}

TEST_CASE("ks_statistic on disjoint supports is one") {
    CHECK(ks_statistic(ecdf(vec({0, 0, 0})), ecdf(vec({1, 1, 1}))) == 1.0);
}

TEST_CASE("ks_statistic of {1,2} vs {1,3} is 0.5") {
    CHECK(ks_statistic(ecdf(vec({1, 2})), ecdf(vec({1, 3}))) == 0.5);
}

TEST_CASE("ks_statistic is symmetric and bounded") {
    Rng rng(93);
    for (int iter = 0; iter < 100; ++iter) {
        std::vector<double> a(1 + rng.below(100)), b(1 + rng.below(100));
        for (auto& x : a) x = std::floor(rng.uniform01() * 20);
        for (auto& x : b) x = std::floor(rng.uniform01() * 20);
        const auto ea = ecdf(a), eb = ecdf(b);
        const double d1 = ks_statistic(ea, eb);
        const double d2 = ks_statistic(eb, ea);
        CHECK(d1 == d2);
        CHECK(d1 >= 0.0);
        CHECK(d1 <= 1.0);
    }
}

TEST_CASE("ks_statistic equals the brute-force sup over union points") {
    Rng rng(94);
    for (int iter = 0; iter < 200; ++iter) {
        std::vector<double> a(1 + rng.below(200)), b(1 + rng.below(200));
        const bool ties = rng.bernoulli(0.5);
        for (auto& x : a) x = ties ? std::floor(rng.uniform01() * 25) : rng.uniform01();
        for (auto& x : b) x = ties ? std::floor(rng.uniform01() * 25) : rng.uniform01();
        CHECK(ks_statistic(ecdf(a), ecdf(b)) == ref::ks_statistic(a, b));
    }
}

TEST_CASE("ks_test against itself never rejects") {
    Rng rng(95);
    std::vector<double> a(1000);
    for (auto& x : a) x = rng.uniform01();
    const auto r = ks_test(a, a, 0.05);
    CHECK(r.statistic_d == 0.0);
    CHECK_FALSE(r.reject);
}

TEST_CASE("ks_test separates disjoint samples at the documented critical value") {
    std::vector<double> a(1000, 0.0), b(1000, 1.0);
    const auto r = ks_test(a, b, 0.05);
    CHECK(r.statistic_d == 1.0);
    CHECK(r.critical_value == doctest::Approx(0.0607).epsilon(1e-3));
    CHECK(r.critical_value == doctest::Approx(1.358 * std::sqrt(2000.0 / 1e6)).epsilon(1e-3));
    CHECK(r.reject);
    CHECK(r.n1 == 1000);
    CHECK(r.n2 == 1000);
}

TEST_CASE("ks_test validates alpha") {
    const auto xs = vec({1, 2, 3});
    CHECK_THROWS_AS(ks_test(xs, xs, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(ks_test(xs, xs, 1.0), std::invalid_argument);
}

TEST_CASE("flow_size_cdf over packets and bytes") {
    std::vector<FlowRecord> flows;
    for (int i = 0; i < 10; ++i) flows.push_back(flow_of(1, 100, i));
    auto e = flow_size_cdf(flows, FlowMetric::packets);
    CHECK(e.cum_prob_at(1) == 1.0);

    flows = {flow_of(1, 40), flow_of(1, 40), flow_of(1, 40), flow_of(5, 7500)};
    e = flow_size_cdf(flows, FlowMetric::packets);
    CHECK(e.cum_prob_at(1) == 0.75);
    e = flow_size_cdf(flows, FlowMetric::bytes);
    CHECK(e.cum_prob_at(40) == 0.75);
    CHECK(e.cum_prob_at(7500) == 1.0);

    CHECK_THROWS_AS(flow_size_cdf({}, FlowMetric::packets), std::invalid_argument);
}

TEST_CASE("packet_size_cdf of an all-1500 trace is a single step") {
    std::vector<PacketRecord> trace(5);
    for (auto& p : trace) {
        p.proto = kProtoUdp;
        p.byte_len = 1500;
    }
    const auto e = packet_size_cdf(trace);
    REQUIRE(e.points.size() == 1);
    CHECK(e.points[0] == std::pair{1500.0, 1.0});
    CHECK_THROWS_AS(packet_size_cdf({}), std::invalid_argument);
}

TEST_CASE("ks_interval_report assigns flows by first timestamp") {
    // two 30s intervals; interval 0 populations differ, interval 1 matches
    std::vector<FlowRecord> original, reconstructed;
    for (int i = 0; i < 40; ++i) original.push_back(flow_of(1 + i % 7, 100, 1'000'000 * i % 29'000'000));
    for (int i = 0; i < 12; ++i) original.push_back(flow_of(2, 100, 30'000'000 + 1'000'000 * i));
    for (int i = 0; i < 25; ++i) reconstructed.push_back(flow_of(1, 40, 1'000'000 * i % 29'000'000));
    for (int i = 0; i < 12; ++i) reconstructed.push_back(flow_of(2, 100, 30'000'000 + 1'000'000 * i));

    const auto rows = ks_interval_report(original, reconstructed, 0, 60'000'000, 30, 0.05);
    REQUIRE(rows.size() == 4);  // 2 intervals x 2 metrics
    CHECK(rows[0].metric == "flow_packets");
    REQUIRE(rows[0].result.has_value());
    REQUIRE(rows[1].result.has_value());
    CHECK(rows[1].result->statistic_d == 0.0);  // identical populations in interval 1
    CHECK_FALSE(rows[1].result->reject);
}

TEST_CASE("ks_interval_report leaves empty intervals untestable") {
    std::vector<FlowRecord> original = {flow_of(3, 300, 5'000'000)};
    std::vector<FlowRecord> reconstructed = {flow_of(3, 300, 35'000'000)};
    const auto rows = ks_interval_report(original, reconstructed, 0, 60'000'000, 30, 0.05);
    REQUIRE(rows.size() == 4);
    CHECK_FALSE(rows[0].result.has_value());
    CHECK_FALSE(rows[1].result.has_value());
}

TEST_CASE("self-comparison never rejects in any interval") {
    Rng rng(96);
    std::vector<FlowRecord> flows;
    for (int i = 0; i < 500; ++i)
        flows.push_back(flow_of(1 + rng.below(50), 40 * (1 + rng.below(50)),
                                static_cast<std::int64_t>(rng.below(120'000'000))));
    const auto rows = ks_interval_report(flows, flows, 0, 120'000'000, 30, 0.05);
    for (const auto& row : rows) {
        REQUIRE(row.result.has_value());
        CHECK(row.result->statistic_d == 0.0);
        CHECK_FALSE(row.result->reject);
    }
}
