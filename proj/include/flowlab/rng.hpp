#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace flowlab {

// Deterministic random primitives.
//
// Every random draw in this project comes from one of two fixed
// constructions, so equal seeds give equal outputs run to run:
//
//   - sequential streams: std::mt19937_64 seeded directly with the 64-bit
//     seed, doubles built from the top 53 bits, u = (x >> 11) * 2^-53;
//   - counter hashes: the splitmix64 finalizer applied to
//     seed + (i + 1) * 0x9E3779B97F4A7C15, which makes per-index draws
//     order-free and safe to evaluate in parallel.
//
// Exponential and Pareto variates use explicit inverse-CDF formulas instead
// of std::*_distribution, whose algorithms differ between standard
// libraries.

inline constexpr std::uint64_t kGolden64 = 0x9E3779B97F4A7C15ull;

// splitmix64 finalizer (Steele, Lea, Flood 2014).
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t index) {
    return mix64(seed + (index + 1) * kGolden64);
}

inline double to_unit_double(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;  // [0, 1)
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    double uniform01() { return to_unit_double(next_u64()); }

    // Inverse-CDF exponential with the given mean.
    double exponential(double mean) { return -mean * std::log(1.0 - uniform01()); }

    // Pareto with shape alpha and scale xmin; always >= xmin.
    double pareto(double alpha, double xmin) {
        return xmin * std::pow(1.0 - uniform01(), -1.0 / alpha);
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Modulo draw; bias is irrelevant at the bounds used here.
    std::uint64_t below(std::uint64_t bound) { return next_u64() % bound; }

  private:
    std::mt19937_64 eng_;
};

}  // namespace flowlab
