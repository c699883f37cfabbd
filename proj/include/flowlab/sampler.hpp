#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flowlab/packet.hpp"

namespace flowlab {

enum class SamplingMode { systematic, bernoulli };

// Either deterministic 1-in-n with a fixed phase (q = 1/n), or independent
// Bernoulli(q) retention.
struct SamplingSpec {
    SamplingMode mode = SamplingMode::systematic;
    std::uint64_t n = 1;       // systematic period
    double q = 1.0;            // bernoulli probability
    std::uint64_t phase = 0;   // index of the first sampled packet, < n
    std::uint64_t seed = 0;    // bernoulli only

    double probability() const { return mode == SamplingMode::systematic ? 1.0 / static_cast<double>(n) : q; }
};

void validate(const SamplingSpec& spec);

// Number of indices i in [0, len) with i % n == phase.
std::size_t systematic_sample_count(std::size_t len, std::uint64_t n, std::uint64_t phase);

// Keeps packets at indices phase, phase+n, phase+2n, ... in order.
std::vector<PacketRecord> systematic_sample(std::span<const PacketRecord> trace,
                                            std::uint64_t n, std::uint64_t phase = 0);

// Keeps each packet independently with probability q; the per-index draw is
// counter_hash(seed, index), so the result does not depend on evaluation
// order.
std::vector<PacketRecord> bernoulli_sample(std::span<const PacketRecord> trace,
                                           double q, std::uint64_t seed);

std::vector<PacketRecord> apply_sampling(std::span<const PacketRecord> trace,
                                         const SamplingSpec& spec);

}  // namespace flowlab
