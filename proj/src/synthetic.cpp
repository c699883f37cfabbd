#include "flowlab/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <unordered_set>

#include "flowlab/rng.hpp"

namespace flowlab {

void validate(const SyntheticConfig& c) {
    if (!(c.duration_s > 0)) throw std::invalid_argument("duration_s must be > 0");
    if (!(c.flow_arrival_rate > 0)) throw std::invalid_argument("flow_arrival_rate must be > 0");
    if (!(c.pareto_alpha > 0)) throw std::invalid_argument("pareto_alpha must be > 0");
    if (c.pareto_xmin < 1) throw std::invalid_argument("pareto_xmin must be >= 1");
    if (!(c.large_pkt_prob >= 0 && c.large_pkt_prob <= 1))
        throw std::invalid_argument("large_pkt_prob must be in [0, 1]");
    if (!(c.mean_ipg_ms > 0)) throw std::invalid_argument("mean_ipg_ms must be > 0");
    if (c.pkt_size_small < 1 || c.pkt_size_large < 1)
        throw std::invalid_argument("packet sizes must be >= 1");
    if (!(c.tcp_fraction >= 0 && c.tcp_fraction <= 1))
        throw std::invalid_argument("tcp_fraction must be in [0, 1]");
}

namespace {

struct FlowPlan {
    std::int64_t start_us;
    std::uint64_t npackets;  // drawn count; realized count may be clipped at duration
    FlowKey key;
    std::uint64_t rng_seed;
};

struct FlowKeySetHash {
    std::size_t operator()(const FlowKey& k) const { return FlowKeyHash{}(k); }
};

// Flow-level attributes come from one sequential stream; per-flow packet
// streams get independent counter-derived seeds so they can be generated in
// any order (or in parallel) without changing the output.
std::vector<FlowPlan> plan_flows(const SyntheticConfig& c) {
    Rng rng(c.seed);
    std::unordered_set<FlowKey, FlowKeySetHash> used;
    std::vector<FlowPlan> plans;
    double t = 0;
    const double mean_gap_s = 1.0 / c.flow_arrival_rate;
    const std::int64_t end_us = static_cast<std::int64_t>(std::floor(c.duration_s * 1e6));
    for (std::uint64_t i = 0;; ++i) {
        t += rng.exponential(mean_gap_s);
        if (t >= c.duration_s) break;
        FlowPlan plan;
        plan.start_us = static_cast<std::int64_t>(std::floor(t * 1e6));
        if (plan.start_us >= end_us) break;  // sub-microsecond tail of a fractional duration
        plan.npackets = static_cast<std::uint64_t>(rng.pareto(c.pareto_alpha, c.pareto_xmin));
        const bool tcp = rng.bernoulli(c.tcp_fraction);
        do {
            plan.key.src_ip = 0x0A000000u | static_cast<std::uint32_t>(rng.below(1u << 24));  // 10/8
            plan.key.dst_ip = 0xC0A80000u | static_cast<std::uint32_t>(rng.below(1u << 16));  // 192.168/16
            plan.key.src_port = static_cast<std::uint16_t>(1024 + rng.below(65536 - 1024));
            plan.key.dst_port = static_cast<std::uint16_t>(1 + rng.below(65535));
            plan.key.proto = tcp ? kProtoTcp : kProtoUdp;
        } while (!used.insert(plan.key).second);
        plan.rng_seed = counter_hash(c.seed, i);
        plans.push_back(plan);
    }
    return plans;
}

// Packet stream of one flow: gap draw, clip check, then size draw; the last
// emitted packet of a TCP flow gets FIN.
std::vector<PacketRecord> flow_packets(const SyntheticConfig& c, const FlowPlan& plan) {
    const std::int64_t end_us = static_cast<std::int64_t>(std::floor(c.duration_s * 1e6));
    Rng rng(plan.rng_seed);
    std::vector<PacketRecord> pkts;
    pkts.reserve(std::min<std::uint64_t>(plan.npackets, 64));
    std::int64_t ts = plan.start_us;
    const bool tcp = plan.key.proto == kProtoTcp;
    for (std::uint64_t j = 0; j < plan.npackets; ++j) {
        if (j > 0) {
            ts += std::llround(rng.exponential(c.mean_ipg_ms) * 1000.0);
            if (ts >= end_us) break;
        }
        PacketRecord p;
        p.ts_us = ts;
        p.src_ip = plan.key.src_ip;
        p.dst_ip = plan.key.dst_ip;
        p.src_port = plan.key.src_port;
        p.dst_port = plan.key.dst_port;
        p.proto = plan.key.proto;
        p.byte_len = rng.bernoulli(c.large_pkt_prob) ? c.pkt_size_large : c.pkt_size_small;
        p.tcp_flags = tcp ? (j == 0 ? kTcpSyn : kTcpAck) : 0;
        pkts.push_back(p);
    }
    if (tcp && !pkts.empty()) pkts.back().tcp_flags |= kTcpFin;
    return pkts;
}

}  // namespace

std::vector<PacketRecord> generate_synthetic(const SyntheticConfig& config) {
    validate(config);
    const std::vector<FlowPlan> plans = plan_flows(config);

    std::vector<std::vector<PacketRecord>> streams(plans.size());
#pragma omp parallel for schedule(dynamic, 256)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(plans.size()); ++i)
        streams[static_cast<std::size_t>(i)] = flow_packets(config, plans[static_cast<std::size_t>(i)]);

    std::size_t total = 0;
    for (const auto& s : streams) total += s.size();
    std::vector<PacketRecord> out;
    out.reserve(total);
    for (const auto& s : streams) out.insert(out.end(), s.begin(), s.end());

    // Interleave flows by time; stable sort keeps generation order on full
    // ties, so the result does not depend on thread count.
    std::stable_sort(out.begin(), out.end(), [](const PacketRecord& a, const PacketRecord& b) {
        if (a.ts_us != b.ts_us) return a.ts_us < b.ts_us;
        if (a.src_ip != b.src_ip) return a.src_ip < b.src_ip;
        return a.src_port < b.src_port;
    });
    return out;
}

}  // namespace flowlab
