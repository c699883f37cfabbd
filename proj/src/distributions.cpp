#include "flowlab/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "flowlab/csv.hpp"

namespace flowlab {

double Ecdf::cum_prob_at(double x) const {
    // Last step with value <= x; F is 0 before the first value.
    auto it = std::upper_bound(points.begin(), points.end(), x,
                               [](double v, const std::pair<double, double>& pt) { return v < pt.first; });
    if (it == points.begin()) return 0.0;
    return (it - 1)->second;
}

Ecdf ecdf(std::span<const double> samples) {
    if (samples.empty()) throw std::invalid_argument("ecdf: empty sample");
    for (double v : samples)
        if (std::isnan(v)) throw std::invalid_argument("ecdf: NaN sample");

    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());

    Ecdf e;
    e.n = sorted.size();
    const double n = static_cast<double>(e.n);
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        // cumulative count / n (not incremental adds) keeps the final
        // probability exactly 1.
        e.points.emplace_back(sorted[i], static_cast<double>(j) / n);
        i = j;
    }
    return e;
}

double ks_statistic(const Ecdf& a, const Ecdf& b) {
    if (a.points.empty() || b.points.empty()) throw std::invalid_argument("ks_statistic: empty ecdf");
    double d = 0;
    std::size_t ia = 0, ib = 0;
    double fa = 0, fb = 0;
    while (ia < a.points.size() || ib < b.points.size()) {
        double va = ia < a.points.size() ? a.points[ia].first : std::numeric_limits<double>::infinity();
        double vb = ib < b.points.size() ? b.points[ib].first : std::numeric_limits<double>::infinity();
        if (va <= vb) fa = a.points[ia++].second;
        if (vb <= va) fb = b.points[ib++].second;
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

double ks_critical_value(double alpha, std::size_t n1, std::size_t n2) {
    if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("alpha must be in (0, 1)");
    if (n1 < 1 || n2 < 1) throw std::invalid_argument("sample sizes must be >= 1");
    const double c = std::sqrt(-std::log(alpha / 2.0) / 2.0);
    const double f1 = static_cast<double>(n1);
    const double f2 = static_cast<double>(n2);
    return c * std::sqrt((f1 + f2) / (f1 * f2));
}

KsResult ks_test(std::span<const double> a, std::span<const double> b, double alpha) {
    if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("alpha must be in (0, 1)");
    KsResult r;
    r.n1 = a.size();
    r.n2 = b.size();
    r.alpha = alpha;
    r.statistic_d = ks_statistic(ecdf(a), ecdf(b));
    r.critical_value = ks_critical_value(alpha, r.n1, r.n2);
    r.reject = r.statistic_d > r.critical_value;
    return r;
}

Ecdf flow_size_cdf(std::span<const FlowRecord> flows, FlowMetric metric) {
    if (flows.empty()) throw std::invalid_argument("flow_size_cdf: empty flow set");
    std::vector<double> samples(flows.size());
    for (std::size_t i = 0; i < flows.size(); ++i)
        samples[i] = static_cast<double>(metric == FlowMetric::packets ? flows[i].packets
                                                                       : flows[i].bytes);
    return ecdf(samples);
}

Ecdf packet_size_cdf(std::span<const PacketRecord> packets) {
    if (packets.empty()) throw std::invalid_argument("packet_size_cdf: empty trace");
    std::vector<double> samples(packets.size());
    for (std::size_t i = 0; i < packets.size(); ++i) samples[i] = packets[i].byte_len;
    return ecdf(samples);
}

namespace {

// Per-flow metric samples bucketed by the interval of first_ts_us.
std::vector<std::vector<double>> bucket_metric(std::span<const FlowRecord> flows,
                                               std::int64_t start_us, std::int64_t w_us,
                                               std::size_t intervals, FlowMetric metric) {
    std::vector<std::vector<double>> buckets(intervals);
    for (const auto& r : flows) {
        if (r.first_ts_us < start_us) continue;
        const auto k = static_cast<std::size_t>((r.first_ts_us - start_us) / w_us);
        if (k >= intervals) continue;
        buckets[k].push_back(
            static_cast<double>(metric == FlowMetric::packets ? r.packets : r.bytes));
    }
    return buckets;
}

}  // namespace

std::vector<KsIntervalRow> ks_interval_report(std::span<const FlowRecord> original,
                                              std::span<const FlowRecord> reconstructed,
                                              std::int64_t start_ts_us, std::int64_t end_ts_us,
                                              double interval_s, double alpha) {
    if (!(interval_s > 0)) throw std::invalid_argument("interval width must be > 0");
    if (start_ts_us > end_ts_us) throw std::invalid_argument("window start must be <= end");
    const std::int64_t w_us = static_cast<std::int64_t>(std::llround(interval_s * 1e6));
    if (w_us < 1) throw std::invalid_argument("interval width must be >= 1 microsecond");
    const std::int64_t span = end_ts_us - start_ts_us;
    const auto intervals = static_cast<std::size_t>((span + w_us - 1) / w_us);

    struct MetricDef {
        FlowMetric metric;
        const char* name;
    };
    static constexpr MetricDef kMetrics[] = {{FlowMetric::packets, "flow_packets"},
                                             {FlowMetric::bytes, "flow_bytes"}};

    std::vector<KsIntervalRow> rows(intervals * 2);
    for (const auto& def : kMetrics) {
        const auto a = bucket_metric(original, start_ts_us, w_us, intervals, def.metric);
        const auto b = bucket_metric(reconstructed, start_ts_us, w_us, intervals, def.metric);
        const std::size_t base = def.metric == FlowMetric::packets ? 0 : intervals;
        // Intervals are independent; rows are written by index, so the
        // schedule cannot reorder the report.
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(intervals); ++k) {
            KsIntervalRow row;
            row.interval_index = static_cast<std::int64_t>(k);
            row.metric = def.name;
            const auto& sa = a[static_cast<std::size_t>(k)];
            const auto& sb = b[static_cast<std::size_t>(k)];
            if (!sa.empty() && !sb.empty()) row.result = ks_test(sa, sb, alpha);
            rows[base + static_cast<std::size_t>(k)] = std::move(row);
        }
    }
    return rows;
}

void write_cdf_csv(std::ostream& out, const Ecdf& e) {
    out << kCdfCsvHeader << '\n';
    for (const auto& [value, prob] : e.points)
        out << csv::format_double(value) << ',' << csv::format_double(prob) << '\n';
    out.flush();
    if (!out) throw std::runtime_error("cdf csv write failed");
}

void write_ks_report_csv(std::ostream& out, std::span<const KsIntervalRow> rows) {
    out << kKsReportCsvHeader << '\n';
    for (const auto& r : rows) {
        out << r.interval_index << ',' << r.metric << ',';
        if (r.result) {
            out << csv::format_double(r.result->statistic_d) << ','
                << csv::format_double(r.result->critical_value) << ','
                << (r.result->reject ? "true" : "false");
        } else {
            out << "NA,NA,NA";
        }
        out << '\n';
    }
    out.flush();
    if (!out) throw std::runtime_error("ks report write failed");
}

std::vector<double> read_sample_column(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open sample file: " + path);
    std::vector<double> samples;
    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            if (in.peek() == EOF) break;
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty row");
        }
        double v;
        if (!csv::parse_double(line, v)) {
            if (first) {
                first = false;  // header line
                continue;
            }
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": not a number");
        }
        first = false;
        samples.push_back(v);
    }
    return samples;
}

}  // namespace flowlab
