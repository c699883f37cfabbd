#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowlab/flow_cache.hpp"
#include "flowlab/packet.hpp"

namespace flowlab {

// Right-continuous empirical CDF: F(x) = (# samples <= x) / n, stored as
// (value, cumulative probability) steps at the distinct sample values. The
// last cumulative probability is exactly 1.
struct Ecdf {
    std::vector<std::pair<double, double>> points;
    std::size_t n = 0;

    double cum_prob_at(double x) const;  // F(x)
};

struct KsResult {
    double statistic_d = 0;
    std::size_t n1 = 0, n2 = 0;
    double critical_value = 0;
    bool reject = false;
    double alpha = 0;
};

Ecdf ecdf(std::span<const double> samples);

// D = sup_x |F_a(x) - F_b(x)|, evaluated over the union of step points
// (exact for step functions).
double ks_statistic(const Ecdf& a, const Ecdf& b);

// Asymptotic two-sample critical value c(alpha) * sqrt((n1+n2)/(n1*n2)) with
// c(alpha) = sqrt(-ln(alpha/2)/2); c(0.05) = 1.358. Rejects iff D exceeds it.
double ks_critical_value(double alpha, std::size_t n1, std::size_t n2);
KsResult ks_test(std::span<const double> a, std::span<const double> b, double alpha);

enum class FlowMetric { packets, bytes };

Ecdf flow_size_cdf(std::span<const FlowRecord> flows, FlowMetric metric);
Ecdf packet_size_cdf(std::span<const PacketRecord> packets);

// Per-interval two-sample KS between the original flow population and the
// one rebuilt from the sampled stream. A flow belongs to the interval of its
// first_ts_us. Intervals where either side is empty are untestable and carry
// no result.
struct KsIntervalRow {
    std::int64_t interval_index = 0;
    std::string metric;  // "flow_packets" or "flow_bytes"
    std::optional<KsResult> result;
};

std::vector<KsIntervalRow> ks_interval_report(std::span<const FlowRecord> original,
                                              std::span<const FlowRecord> reconstructed,
                                              std::int64_t start_ts_us, std::int64_t end_ts_us,
                                              double interval_s, double alpha);

// CDF and KS-report CSV contracts.
inline constexpr const char* kCdfCsvHeader = "value,cum_prob";
inline constexpr const char* kKsReportCsvHeader = "interval_index,metric,d_statistic,critical,reject";
void write_cdf_csv(std::ostream& out, const Ecdf& e);
void write_ks_report_csv(std::ostream& out, std::span<const KsIntervalRow> rows);

// Single-column sample list; a leading non-numeric line is treated as a
// header and skipped.
std::vector<double> read_sample_column(const std::string& path);

}  // namespace flowlab
