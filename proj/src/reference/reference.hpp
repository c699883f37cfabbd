#pragma once

// Straightforward serial implementations of the parallel kernels and the
// brute-force oracles the test suites check against. Everything here is
// written independently of the main library paths (shared domain types
// aside) and favours obviousness over speed.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "flowlab/flow_cache.hpp"
#include "flowlab/packet.hpp"
#include "flowlab/stats.hpp"
#include "flowlab/synthetic.hpp"

namespace flowlab::ref {

// Serial twin of generate_synthetic; must reproduce it byte for byte.
std::vector<PacketRecord> generate_synthetic(const SyntheticConfig& config);

// Serial twins of the samplers.
std::vector<PacketRecord> systematic_sample(std::span<const PacketRecord> trace,
                                            std::uint64_t n, std::uint64_t phase);
std::vector<PacketRecord> bernoulli_sample(std::span<const PacketRecord> trace,
                                           double q, std::uint64_t seed);

// Serial twin of bin_stream.
BinnedSeries bin_stream(std::span<const PacketRecord> packets, double bin_width_s,
                        std::int64_t start_ts_us, std::int64_t end_ts_us);

// Plain 5-tuple grouping with no expiry at all: what build_flows must equal
// when timeouts exceed the trace span, capacity is unlimited and FIN/RST
// expiry is off. Records carry reason flush and are sorted by
// (first_ts_us, key).
std::vector<FlowRecord> group_flows(std::span<const PacketRecord> trace);

// Long-double one-shot moment computation.
struct Moments {
    double mean = 0;
    double std = 0;
    std::optional<double> skewness;
    std::optional<double> kurtosis_excess;
};
Moments moments(std::span<const double> series);

// D = max over every sample value of |F_a - F_b|, each CDF evaluated by
// counting.
double ks_statistic(std::span<const double> a, std::span<const double> b);

// F(x) by counting.
double ecdf_at(std::span<const double> samples, double x);

}  // namespace flowlab::ref
