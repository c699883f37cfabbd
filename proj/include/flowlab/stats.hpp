#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowlab/inversion.hpp"
#include "flowlab/packet.hpp"

namespace flowlab {

// Per-interval byte counts d and packet counts p. Bin k covers
// [start + k*w, start + (k+1)*w); packets outside [start, end) are excluded
// and counted.
struct BinnedSeries {
    double bin_width_s = 0;
    std::int64_t start_ts_us = 0;
    std::vector<std::uint64_t> d;  // bytes per bin
    std::vector<std::uint64_t> p;  // packets per bin
    std::uint64_t excluded = 0;

    std::size_t bins() const { return d.size(); }
};

// Population moments. For zero-variance input, skewness and excess kurtosis
// are undefined and left empty; mean and std are always set.
struct MomentSummary {
    double mean = 0;
    double std = 0;
    std::optional<double> skewness;
    std::optional<double> kurtosis_excess;
};

BinnedSeries bin_stream(std::span<const PacketRecord> packets, double bin_width_s,
                        std::int64_t start_ts_us, std::int64_t end_ts_us);

// mean = sum(x)/n, mu_k = sum((x-mean)^k)/n, std = sqrt(mu_2),
// skewness = mu_3 / mu_2^1.5, kurtosis_excess = mu_4 / mu_2^2 - 3.
// Requires n >= 2.
MomentSummary moments(std::span<const double> series);

// Element-wise (d - dn) / d; bins with d = 0 are undefined.
std::vector<std::optional<double>> relative_error(std::span<const double> d,
                                                  std::span<const double> dn);

// One moment-table row: quantity is "d" or "p"; series is "original",
// "inverted" or "difference".
struct TableRow {
    std::string quantity;
    double bin_s = 0;
    std::string series;
    MomentSummary m;
};

// The six rows for one bin width: moments of the original, the inverted,
// and their element-wise difference, for both bytes and packets.
std::vector<TableRow> table_rows(const BinnedSeries& original, const InvertedSeries& dn,
                                 const InvertedSeries& pn);

std::vector<double> to_doubles(std::span<const std::uint64_t> v);

// Binned-series CSV contract.
inline constexpr const char* kBinnedCsvHeader = "bin_start_us,d,p,dn,pn,e_d,e_p";
void write_binned_csv(std::ostream& out, const BinnedSeries& original, const InvertedSeries& dn,
                      const InvertedSeries& pn);

struct BinnedCsv {
    std::vector<std::int64_t> bin_start_us;
    std::vector<double> d, p, dn, pn;
};
BinnedCsv read_binned_csv(const std::string& path);

// Moment-table CSV contract.
inline constexpr const char* kMomentCsvHeader = "quantity,bin_s,series,mean,std,skewness,kurtosis";
void write_moment_rows_csv(std::ostream& out, std::span<const TableRow> rows);

}  // namespace flowlab
