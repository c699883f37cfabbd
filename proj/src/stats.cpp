#include "flowlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "flowlab/csv.hpp"

namespace flowlab {

BinnedSeries bin_stream(std::span<const PacketRecord> packets, double bin_width_s,
                        std::int64_t start_ts_us, std::int64_t end_ts_us) {
    if (!(bin_width_s > 0)) throw std::invalid_argument("bin width must be > 0");
    if (start_ts_us > end_ts_us) throw std::invalid_argument("window start must be <= end");
    const std::int64_t w_us = static_cast<std::int64_t>(std::llround(bin_width_s * 1e6));
    if (w_us < 1) throw std::invalid_argument("bin width must be >= 1 microsecond");
    for (std::size_t i = 1; i < packets.size(); ++i)
        if (packets[i].ts_us < packets[i - 1].ts_us)
            throw std::invalid_argument("bin_stream: packets not sorted at record " + std::to_string(i));

    const std::int64_t span = end_ts_us - start_ts_us;
    const std::size_t nbins = static_cast<std::size_t>((span + w_us - 1) / w_us);

    BinnedSeries out;
    out.bin_width_s = bin_width_s;
    out.start_ts_us = start_ts_us;
    out.d.assign(nbins, 0);
    out.p.assign(nbins, 0);

    int nthreads = 1;
#ifdef _OPENMP
    nthreads = omp_get_max_threads();
#endif
    // Per-thread histograms merged afterwards; all-integer, so the result
    // is independent of the schedule.
    std::vector<std::vector<std::uint64_t>> d_part(static_cast<std::size_t>(nthreads)),
        p_part(static_cast<std::size_t>(nthreads));
    std::vector<std::uint64_t> excl_part(static_cast<std::size_t>(nthreads), 0);

#pragma omp parallel num_threads(nthreads)
    {
        int tid = 0;
#ifdef _OPENMP
        tid = omp_get_thread_num();
#endif
        auto& d = d_part[static_cast<std::size_t>(tid)];
        auto& p = p_part[static_cast<std::size_t>(tid)];
        d.assign(nbins, 0);
        p.assign(nbins, 0);
        std::uint64_t excluded = 0;
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(packets.size()); ++i) {
            const PacketRecord& pkt = packets[static_cast<std::size_t>(i)];
            if (pkt.ts_us < start_ts_us || pkt.ts_us >= end_ts_us) {
                ++excluded;
                continue;
            }
            const auto k = static_cast<std::size_t>((pkt.ts_us - start_ts_us) / w_us);
            d[k] += pkt.byte_len;
            p[k] += 1;
        }
        excl_part[static_cast<std::size_t>(tid)] = excluded;
    }

    for (int t = 0; t < nthreads; ++t) {
        for (std::size_t k = 0; k < nbins; ++k) {
            out.d[k] += d_part[static_cast<std::size_t>(t)][k];
            out.p[k] += p_part[static_cast<std::size_t>(t)][k];
        }
        out.excluded += excl_part[static_cast<std::size_t>(t)];
    }
    return out;
}

MomentSummary moments(std::span<const double> series) {
    const std::size_t n = series.size();
    if (n < 2) throw std::invalid_argument("moments: need at least 2 values");

    MomentSummary s;
    const auto [mn, mx] = std::minmax_element(series.begin(), series.end());
    if (*mn == *mx) {
        // Constant input: zero variance, higher moments undefined.
        s.mean = *mn;
        s.std = 0;
        return s;
    }

    double sum = 0;
    for (double x : series) sum += x;
    const double mean = sum / static_cast<double>(n);
    double m2 = 0, m3 = 0, m4 = 0;
    for (double x : series) {
        const double dx = x - mean;
        const double dx2 = dx * dx;
        m2 += dx2;
        m3 += dx2 * dx;
        m4 += dx2 * dx2;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);

    s.mean = mean;
    s.std = std::sqrt(m2);
    if (m2 > 0) {
        s.skewness = m3 / (m2 * s.std);
        s.kurtosis_excess = m4 / (m2 * m2) - 3.0;
    }
    return s;
}

std::vector<std::optional<double>> relative_error(std::span<const double> d,
                                                  std::span<const double> dn) {
    if (d.size() != dn.size()) throw std::invalid_argument("relative_error: length mismatch");
    std::vector<std::optional<double>> out(d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d[i] != 0) out[i] = (d[i] - dn[i]) / d[i];
    return out;
}

std::vector<double> to_doubles(std::span<const std::uint64_t> v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<double>(v[i]);
    return out;
}

std::vector<TableRow> table_rows(const BinnedSeries& original, const InvertedSeries& dn,
                                 const InvertedSeries& pn) {
    if (dn.values.size() != original.bins() || pn.values.size() != original.bins())
        throw std::invalid_argument("table_rows: series not aligned");

    auto diff = [](std::span<const double> a, std::span<const double> b) {
        std::vector<double> out(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
        return out;
    };

    const std::vector<double> d = to_doubles(original.d);
    const std::vector<double> p = to_doubles(original.p);

    std::vector<TableRow> rows;
    rows.reserve(6);
    rows.push_back({"d", original.bin_width_s, "original", moments(d)});
    rows.push_back({"d", original.bin_width_s, "inverted", moments(dn.values)});
    rows.push_back({"d", original.bin_width_s, "difference", moments(diff(d, dn.values))});
    rows.push_back({"p", original.bin_width_s, "original", moments(p)});
    rows.push_back({"p", original.bin_width_s, "inverted", moments(pn.values)});
    rows.push_back({"p", original.bin_width_s, "difference", moments(diff(p, pn.values))});
    return rows;
}

void write_binned_csv(std::ostream& out, const BinnedSeries& original, const InvertedSeries& dn,
                      const InvertedSeries& pn) {
    if (dn.values.size() != original.bins() || pn.values.size() != original.bins())
        throw std::invalid_argument("write_binned_csv: series not aligned");
    const std::vector<double> d = to_doubles(original.d);
    const std::vector<double> p = to_doubles(original.p);
    const auto e_d = relative_error(d, dn.values);
    const auto e_p = relative_error(p, pn.values);
    const std::int64_t w_us = static_cast<std::int64_t>(std::llround(original.bin_width_s * 1e6));

    out << kBinnedCsvHeader << '\n';
    for (std::size_t k = 0; k < original.bins(); ++k) {
        out << (original.start_ts_us + static_cast<std::int64_t>(k) * w_us) << ','
            << original.d[k] << ',' << original.p[k] << ',' << csv::format_double(dn.values[k])
            << ',' << csv::format_double(pn.values[k]) << ',' << csv::format_opt(e_d[k]) << ','
            << csv::format_opt(e_p[k]) << '\n';
    }
    out.flush();
    if (!out) throw std::runtime_error("binned csv write failed");
}

BinnedCsv read_binned_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open binned csv: " + path);
    auto fail = [&path](std::size_t line, const std::string& what) -> void {
        throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
    };
    std::string line;
    if (!std::getline(in, line)) fail(1, "missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kBinnedCsvHeader) fail(1, "bad header, expected '" + std::string(kBinnedCsvHeader) + "'");

    BinnedCsv out;
    std::vector<std::string_view> f;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            if (in.peek() == EOF) break;
            fail(lineno, "empty row");
        }
        csv::split_fields(line, ',', f);
        if (f.size() != 7) fail(lineno, "expected 7 fields, got " + std::to_string(f.size()));
        std::int64_t start;
        double d, p, dn, pn;
        if (!csv::parse_int(f[0], start)) fail(lineno, "bad bin_start_us");
        if (!csv::parse_double(f[1], d)) fail(lineno, "bad d");
        if (!csv::parse_double(f[2], p)) fail(lineno, "bad p");
        if (!csv::parse_double(f[3], dn)) fail(lineno, "bad dn");
        if (!csv::parse_double(f[4], pn)) fail(lineno, "bad pn");
        out.bin_start_us.push_back(start);
        out.d.push_back(d);
        out.p.push_back(p);
        out.dn.push_back(dn);
        out.pn.push_back(pn);
    }
    return out;
}

void write_moment_rows_csv(std::ostream& out, std::span<const TableRow> rows) {
    out << kMomentCsvHeader << '\n';
    for (const auto& r : rows) {
        out << r.quantity << ',' << csv::format_double(r.bin_s) << ',' << r.series << ','
            << csv::format_double(r.m.mean) << ',' << csv::format_double(r.m.std) << ','
            << csv::format_opt(r.m.skewness) << ',' << csv::format_opt(r.m.kurtosis_excess)
            << '\n';
    }
    out.flush();
    if (!out) throw std::runtime_error("moment csv write failed");
}

}  // namespace flowlab
