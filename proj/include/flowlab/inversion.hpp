#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace flowlab {

// A sampled series scaled back to an estimate of the unsampled one.
struct InvertedSeries {
    std::vector<double> values;  // source divided element-wise by q
    double q = 1.0;
};

// x / q. Requires 0 < q <= 1.
double invert_count(double x, double q);

InvertedSeries invert_series(std::span<const double> series, double q);
InvertedSeries invert_series(std::span<const std::uint64_t> series, double q);

}  // namespace flowlab
