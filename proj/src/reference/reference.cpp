#include "reference.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

namespace flowlab::ref {

namespace {

// The documented draw constructions, restated here so the reference does not
// lean on the library's implementation.
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t finalize64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double unit(std::uint64_t x) { return static_cast<double>(x >> 11) * 0x1.0p-53; }

struct Stream {
    std::mt19937_64 eng;
    explicit Stream(std::uint64_t seed) : eng(seed) {}
    double u() { return unit(eng()); }
    double expo(double mean) { return -mean * std::log(1.0 - u()); }
    double pareto(double alpha, double xmin) { return xmin * std::pow(1.0 - u(), -1.0 / alpha); }
    bool coin(double p) { return u() < p; }
    std::uint64_t below(std::uint64_t bound) { return eng() % bound; }
};

}  // namespace

std::vector<PacketRecord> generate_synthetic(const SyntheticConfig& c) {
    validate(c);
    const std::int64_t end_us = static_cast<std::int64_t>(std::floor(c.duration_s * 1e6));

    struct Plan {
        std::int64_t start_us;
        std::uint64_t npackets;
        FlowKey key;
        std::uint64_t seed;
    };

    Stream main(c.seed);
    std::vector<Plan> plans;
    {
        std::set<FlowKey> used;
        double t = 0;
        for (std::uint64_t i = 0;; ++i) {
            t += main.expo(1.0 / c.flow_arrival_rate);
            if (t >= c.duration_s) break;
            Plan plan;
            plan.start_us = static_cast<std::int64_t>(std::floor(t * 1e6));
            if (plan.start_us >= end_us) break;
            plan.npackets = static_cast<std::uint64_t>(main.pareto(c.pareto_alpha, c.pareto_xmin));
            const bool tcp = main.coin(c.tcp_fraction);
            do {
                plan.key.src_ip = 0x0A000000u | static_cast<std::uint32_t>(main.below(1u << 24));
                plan.key.dst_ip = 0xC0A80000u | static_cast<std::uint32_t>(main.below(1u << 16));
                plan.key.src_port = static_cast<std::uint16_t>(1024 + main.below(65536 - 1024));
                plan.key.dst_port = static_cast<std::uint16_t>(1 + main.below(65535));
                plan.key.proto = tcp ? kProtoTcp : kProtoUdp;
            } while (!used.insert(plan.key).second);
            plan.seed = finalize64(c.seed + (i + 1) * kGolden);
            plans.push_back(plan);
        }
    }

    std::vector<PacketRecord> out;
    for (const Plan& plan : plans) {
        Stream rng(plan.seed);
        const bool tcp = plan.key.proto == kProtoTcp;
        std::int64_t ts = plan.start_us;
        std::size_t first_of_flow = out.size();
        for (std::uint64_t j = 0; j < plan.npackets; ++j) {
            if (j > 0) {
                ts += std::llround(rng.expo(c.mean_ipg_ms) * 1000.0);
                if (ts >= end_us) break;
            }
            PacketRecord p;
            p.ts_us = ts;
            p.src_ip = plan.key.src_ip;
            p.dst_ip = plan.key.dst_ip;
            p.src_port = plan.key.src_port;
            p.dst_port = plan.key.dst_port;
            p.proto = plan.key.proto;
            p.byte_len = rng.coin(c.large_pkt_prob) ? c.pkt_size_large : c.pkt_size_small;
            p.tcp_flags = tcp ? (j == 0 ? kTcpSyn : kTcpAck) : 0;
            out.push_back(p);
        }
        if (tcp && out.size() > first_of_flow) out.back().tcp_flags |= kTcpFin;
    }

    std::stable_sort(out.begin(), out.end(), [](const PacketRecord& a, const PacketRecord& b) {
        if (a.ts_us != b.ts_us) return a.ts_us < b.ts_us;
        if (a.src_ip != b.src_ip) return a.src_ip < b.src_ip;
        return a.src_port < b.src_port;
    });
    return out;
}

std::vector<PacketRecord> systematic_sample(std::span<const PacketRecord> trace,
                                            std::uint64_t n, std::uint64_t phase) {
    if (n < 1 || phase >= n) throw std::invalid_argument("bad systematic spec");
    std::vector<PacketRecord> out;
    for (std::size_t i = 0; i < trace.size(); ++i)
        if (i % n == phase) out.push_back(trace[i]);
    return out;
}

std::vector<PacketRecord> bernoulli_sample(std::span<const PacketRecord> trace,
                                           double q, std::uint64_t seed) {
    if (!(q > 0 && q <= 1)) throw std::invalid_argument("q must be in (0, 1]");
    std::vector<PacketRecord> out;
    for (std::size_t i = 0; i < trace.size(); ++i)
        if (unit(finalize64(seed + (static_cast<std::uint64_t>(i) + 1) * kGolden)) < q)
            out.push_back(trace[i]);
    return out;
}

BinnedSeries bin_stream(std::span<const PacketRecord> packets, double bin_width_s,
                        std::int64_t start_ts_us, std::int64_t end_ts_us) {
    if (!(bin_width_s > 0)) throw std::invalid_argument("bin width must be > 0");
    if (start_ts_us > end_ts_us) throw std::invalid_argument("window start must be <= end");
    const std::int64_t w_us = static_cast<std::int64_t>(std::llround(bin_width_s * 1e6));
    const std::int64_t span = end_ts_us - start_ts_us;
    const auto nbins = static_cast<std::size_t>((span + w_us - 1) / w_us);

    BinnedSeries out;
    out.bin_width_s = bin_width_s;
    out.start_ts_us = start_ts_us;
    out.d.assign(nbins, 0);
    out.p.assign(nbins, 0);
    for (const auto& pkt : packets) {
        if (pkt.ts_us < start_ts_us || pkt.ts_us >= end_ts_us) {
            ++out.excluded;
            continue;
        }
        const auto k = static_cast<std::size_t>((pkt.ts_us - start_ts_us) / w_us);
        out.d[k] += pkt.byte_len;
        out.p[k] += 1;
    }
    return out;
}

std::vector<FlowRecord> group_flows(std::span<const PacketRecord> trace) {
    std::map<FlowKey, FlowRecord> groups;
    for (const auto& p : trace) {
        auto [it, fresh] = groups.try_emplace(key_of(p));
        FlowRecord& r = it->second;
        if (fresh) {
            r.key = key_of(p);
            r.first_ts_us = p.ts_us;
            r.last_ts_us = p.ts_us;
            r.packets = 1;
            r.bytes = p.byte_len;
            r.flags_or = p.tcp_flags;
            r.export_reason = ExportReason::flush;
        } else {
            r.last_ts_us = p.ts_us;
            r.packets += 1;
            r.bytes += p.byte_len;
            r.flags_or |= p.tcp_flags;
        }
    }
    std::vector<FlowRecord> out;
    out.reserve(groups.size());
    for (const auto& [key, rec] : groups) out.push_back(rec);
    std::sort(out.begin(), out.end(), [](const FlowRecord& a, const FlowRecord& b) {
        if (a.first_ts_us != b.first_ts_us) return a.first_ts_us < b.first_ts_us;
        return a.key < b.key;
    });
    return out;
}

Moments moments(std::span<const double> series) {
    const std::size_t n = series.size();
    if (n < 2) throw std::invalid_argument("moments: need at least 2 values");
    long double sum = 0;
    for (double x : series) sum += x;
    const long double mean = sum / static_cast<long double>(n);
    long double m2 = 0, m3 = 0, m4 = 0;
    for (double x : series) {
        const long double d = static_cast<long double>(x) - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= static_cast<long double>(n);
    m3 /= static_cast<long double>(n);
    m4 /= static_cast<long double>(n);

    Moments out;
    out.mean = static_cast<double>(mean);
    out.std = static_cast<double>(std::sqrt(m2));
    if (m2 > 0) {
        out.skewness = static_cast<double>(m3 / std::pow(m2, 1.5L));
        out.kurtosis_excess = static_cast<double>(m4 / (m2 * m2) - 3.0L);
    }
    return out;
}

double ecdf_at(std::span<const double> samples, double x) {
    std::size_t count = 0;
    for (double v : samples)
        if (v <= x) ++count;
    return static_cast<double>(count) / static_cast<double>(samples.size());
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    double d = 0;
    auto scan = [&](std::span<const double> values) {
        for (double v : values) d = std::max(d, std::abs(ecdf_at(a, v) - ecdf_at(b, v)));
    };
    scan(a);
    scan(b);
    return d;
}

}  // namespace flowlab::ref
