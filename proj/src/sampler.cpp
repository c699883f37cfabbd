#include "flowlab/sampler.hpp"

#include <cstddef>
#include <stdexcept>

#include "flowlab/rng.hpp"

namespace flowlab {

void validate(const SamplingSpec& spec) {
    if (spec.mode == SamplingMode::systematic) {
        if (spec.n < 1) throw std::invalid_argument("systematic period n must be >= 1");
        if (spec.phase >= spec.n) throw std::invalid_argument("phase must be < n");
    } else {
        if (!(spec.q > 0 && spec.q <= 1)) throw std::invalid_argument("q must be in (0, 1]");
    }
}

std::size_t systematic_sample_count(std::size_t len, std::uint64_t n, std::uint64_t phase) {
    if (n < 1) throw std::invalid_argument("systematic period n must be >= 1");
    if (phase >= n) throw std::invalid_argument("phase must be < n");
    if (len <= phase) return 0;
    return static_cast<std::size_t>((len - 1 - phase) / n) + 1;
}

std::vector<PacketRecord> systematic_sample(std::span<const PacketRecord> trace,
                                            std::uint64_t n, std::uint64_t phase) {
    const std::size_t count = systematic_sample_count(trace.size(), n, phase);
    std::vector<PacketRecord> out(count);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(count); ++k)
        out[static_cast<std::size_t>(k)] = trace[phase + static_cast<std::size_t>(k) * n];
    return out;
}

std::vector<PacketRecord> bernoulli_sample(std::span<const PacketRecord> trace,
                                           double q, std::uint64_t seed) {
    if (!(q > 0 && q <= 1)) throw std::invalid_argument("q must be in (0, 1]");
    const std::size_t len = trace.size();
    // Decide per index first (order-free counter draws), then compact.
    std::vector<std::uint8_t> keep(len);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(len); ++i)
        keep[static_cast<std::size_t>(i)] =
            to_unit_double(counter_hash(seed, static_cast<std::uint64_t>(i))) < q;

    std::size_t count = 0;
    for (std::size_t i = 0; i < len; ++i) count += keep[i];
    std::vector<PacketRecord> out;
    out.reserve(count);
    for (std::size_t i = 0; i < len; ++i)
        if (keep[i]) out.push_back(trace[i]);
    return out;
}

std::vector<PacketRecord> apply_sampling(std::span<const PacketRecord> trace,
                                         const SamplingSpec& spec) {
    validate(spec);
    if (spec.mode == SamplingMode::systematic) return systematic_sample(trace, spec.n, spec.phase);
    return bernoulli_sample(trace, spec.q, spec.seed);
}

}  // namespace flowlab
