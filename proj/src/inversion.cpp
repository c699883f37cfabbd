#include "flowlab/inversion.hpp"

#include <stdexcept>

namespace flowlab {

double invert_count(double x, double q) {
    if (!(q > 0 && q <= 1)) throw std::invalid_argument("q must be in (0, 1]");
    if (x < 0) throw std::invalid_argument("count must be >= 0");
    return x / q;
}

InvertedSeries invert_series(std::span<const double> series, double q) {
    if (!(q > 0 && q <= 1)) throw std::invalid_argument("q must be in (0, 1]");
    InvertedSeries out;
    out.q = q;
    out.values.reserve(series.size());
    for (double x : series) out.values.push_back(invert_count(x, q));
    return out;
}

InvertedSeries invert_series(std::span<const std::uint64_t> series, double q) {
    if (!(q > 0 && q <= 1)) throw std::invalid_argument("q must be in (0, 1]");
    InvertedSeries out;
    out.q = q;
    out.values.reserve(series.size());
    for (std::uint64_t x : series) out.values.push_back(static_cast<double>(x) / q);
    return out;
}

}  // namespace flowlab
