#include "flowlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "flowlab/csv.hpp"
#include "flowlab/distributions.hpp"
#include "flowlab/inversion.hpp"
#include "flowlab/stats.hpp"
#include "flowlab/trace_io.hpp"

namespace flowlab {

namespace fs = std::filesystem;

namespace {

// FNV-1a 64 over a file's bytes; used for the manifest digests.
std::string fnv1a64_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for digest: " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
    }
    char out[19];
    std::snprintf(out, sizeof(out), "0x%016llx", static_cast<unsigned long long>(h));
    return out;
}

// Removes everything this run wrote if a stage fails.
class OutputSet {
  public:
    explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

    std::ofstream open(const std::string& name) {
        const fs::path p = dir_ / name;
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + p.string());
        written_.push_back(name);
        return out;
    }

    void discard_all() {
        std::error_code ec;
        for (const auto& name : written_) fs::remove(dir_ / name, ec);
        written_.clear();
    }

    const std::vector<std::string>& written() const { return written_; }
    const fs::path& dir() const { return dir_; }

  private:
    fs::path dir_;
    std::vector<std::string> written_;
};

template <typename F>
auto stage(const std::string& name, F&& f) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

nlohmann::json sampling_json(const SamplingSpec& s) {
    nlohmann::json j;
    j["mode"] = s.mode == SamplingMode::systematic ? "systematic" : "bernoulli";
    if (s.mode == SamplingMode::systematic) {
        j["n"] = s.n;
        j["phase"] = s.phase;
    } else {
        j["q"] = s.q;
        j["seed"] = s.seed;
    }
    return j;
}

nlohmann::json cache_json(const CacheConfig& c) {
    nlohmann::json j;
    j["inactive_timeout_s"] = c.inactive_timeout_s;
    j["active_timeout_s"] = c.active_timeout_s;
    if (c.capacity)
        j["capacity"] = *c.capacity;
    else
        j["capacity"] = nullptr;
    j["high_watermark"] = c.high_watermark;
    j["evict_fraction"] = c.evict_fraction;
    j["tcp_end_expiry"] = c.tcp_end_expiry;
    return j;
}

nlohmann::json synthetic_json(const SyntheticConfig& c) {
    nlohmann::json j;
    j["duration_s"] = c.duration_s;
    j["flow_arrival_rate"] = c.flow_arrival_rate;
    j["pareto_alpha"] = c.pareto_alpha;
    j["pareto_xmin"] = c.pareto_xmin;
    j["pkt_size_small"] = c.pkt_size_small;
    j["pkt_size_large"] = c.pkt_size_large;
    j["large_pkt_prob"] = c.large_pkt_prob;
    j["mean_ipg_ms"] = c.mean_ipg_ms;
    j["tcp_fraction"] = c.tcp_fraction;
    j["seed"] = c.seed;
    return j;
}

}  // namespace

std::string bins_csv_name(double width_s) {
    return "bins_" + csv::format_double(width_s) + "s.csv";
}

void run_experiment(const ExperimentConfig& cfg) {
    if (cfg.bin_widths_s.empty()) throw StageError("config", "need at least one bin width");
    if (cfg.out_dir.empty()) throw StageError("config", "output directory not set");
    validate(cfg.sampling);
    validate(cfg.cache);
    if (!(cfg.alpha > 0 && cfg.alpha < 1)) throw StageError("config", "alpha must be in (0, 1)");
    if (!(cfg.ks_interval_s > 0)) throw StageError("config", "ks interval must be > 0");

    fs::create_directories(cfg.out_dir);
    OutputSet outputs{fs::path(cfg.out_dir)};

    try {
        // --- source trace ---
        const std::vector<PacketRecord> trace = stage("trace", [&] {
            if (cfg.trace_path) return read_trace(*cfg.trace_path);
            return generate_synthetic(cfg.synthetic);
        });
        if (trace.empty()) throw StageError("trace", "empty trace");

        const std::int64_t start_us = trace.front().ts_us;
        const std::int64_t end_us = trace.back().ts_us + 1;
        const double q = cfg.sampling.probability();

        // --- sample ---
        const std::vector<PacketRecord> sampled =
            stage("sample", [&] { return apply_sampling(trace, cfg.sampling); });
        if (sampled.empty()) throw StageError("sample", "sampling kept no packets");

        // --- flows (original and reconstructed-from-sampled) ---
        const std::vector<FlowRecord> flows_orig =
            stage("flows", [&] { return build_flows(trace, cfg.cache); });
        const std::vector<FlowRecord> flows_sampled =
            stage("flows", [&] { return build_flows(sampled, cfg.cache); });

        // --- per-width binned series, moment table, error summary ---
        std::vector<TableRow> all_rows;
        struct ErrSummary {
            double bin_s;
            char quantity;
            double mean_e, mean_abs_e, rms_e, max_abs_e;
            std::size_t defined, undefined;
        };
        std::vector<ErrSummary> err_rows;

        for (double w : cfg.bin_widths_s) {
            stage("bins (width " + csv::format_double(w) + " s)", [&]() -> int {
                const BinnedSeries orig = bin_stream(trace, w, start_us, end_us);
                const BinnedSeries samp = bin_stream(sampled, w, start_us, end_us);
                const InvertedSeries dn = invert_series(std::span<const std::uint64_t>(samp.d), q);
                const InvertedSeries pn = invert_series(std::span<const std::uint64_t>(samp.p), q);

                auto out = outputs.open(bins_csv_name(w));
                write_binned_csv(out, orig, dn, pn);

                auto rows = table_rows(orig, dn, pn);
                all_rows.insert(all_rows.end(), rows.begin(), rows.end());

                for (char quantity : {'d', 'p'}) {
                    const auto& base = quantity == 'd' ? orig.d : orig.p;
                    const auto& inv = quantity == 'd' ? dn.values : pn.values;
                    const auto errs = relative_error(to_doubles(base), inv);
                    ErrSummary s{w, quantity, 0, 0, 0, 0, 0, 0};
                    for (const auto& e : errs) {
                        if (!e) {
                            ++s.undefined;
                            continue;
                        }
                        ++s.defined;
                        s.mean_e += *e;
                        s.mean_abs_e += std::abs(*e);
                        s.rms_e += *e * *e;
                        s.max_abs_e = std::max(s.max_abs_e, std::abs(*e));
                    }
                    if (s.defined > 0) {
                        s.mean_e /= static_cast<double>(s.defined);
                        s.mean_abs_e /= static_cast<double>(s.defined);
                        s.rms_e = std::sqrt(s.rms_e / static_cast<double>(s.defined));
                    }
                    err_rows.push_back(s);
                }
                return 0;
            });
        }

        stage("moments", [&]() -> int {
            auto out = outputs.open("moments.csv");
            write_moment_rows_csv(out, all_rows);
            return 0;
        });

        stage("error_summary", [&]() -> int {
            auto out = outputs.open("error_summary.csv");
            out << "bin_s,quantity,mean_e,mean_abs_e,rms_e,max_abs_e,bins_defined,bins_undefined\n";
            for (const auto& s : err_rows) {
                out << csv::format_double(s.bin_s) << ',' << s.quantity << ','
                    << (s.defined ? csv::format_double(s.mean_e) : "NA") << ','
                    << (s.defined ? csv::format_double(s.mean_abs_e) : "NA") << ','
                    << (s.defined ? csv::format_double(s.rms_e) : "NA") << ','
                    << (s.defined ? csv::format_double(s.max_abs_e) : "NA") << ',' << s.defined
                    << ',' << s.undefined << '\n';
            }
            out.flush();
            if (!out) throw std::runtime_error("error summary write failed");
            return 0;
        });

        // --- CDFs (packet sizes; flow sizes in packets and bytes) ---
        stage("cdf", [&]() -> int {
            auto write = [&](const std::string& name, const Ecdf& e) {
                auto out = outputs.open(name);
                write_cdf_csv(out, e);
            };
            write("cdf_packet_size_original.csv", packet_size_cdf(trace));
            write("cdf_packet_size_sampled.csv", packet_size_cdf(sampled));
            write("cdf_flow_packets_original.csv", flow_size_cdf(flows_orig, FlowMetric::packets));
            write("cdf_flow_packets_sampled.csv", flow_size_cdf(flows_sampled, FlowMetric::packets));
            write("cdf_flow_bytes_original.csv", flow_size_cdf(flows_orig, FlowMetric::bytes));
            write("cdf_flow_bytes_sampled.csv", flow_size_cdf(flows_sampled, FlowMetric::bytes));
            return 0;
        });

        // --- per-interval KS report ---
        stage("kstest", [&]() -> int {
            const auto rows = ks_interval_report(flows_orig, flows_sampled, start_us, end_us,
                                                 cfg.ks_interval_s, cfg.alpha);
            auto out = outputs.open("ks_report.csv");
            write_ks_report_csv(out, rows);
            return 0;
        });

        // --- manifest (config echo + digests; excludes out_dir so equal
        // configs give byte-identical reports wherever they land) ---
        stage("manifest", [&]() -> int {
            nlohmann::json j;
            j["tool"] = "flowlab";
            j["command"] = "run";
            nlohmann::json config;
            if (cfg.trace_path) {
                config["trace"] = *cfg.trace_path;
            } else {
                config["synthetic"] = synthetic_json(cfg.synthetic);
            }
            config["sampling"] = sampling_json(cfg.sampling);
            config["cache"] = cache_json(cfg.cache);
            config["bin_widths_s"] = cfg.bin_widths_s;
            config["ks_interval_s"] = cfg.ks_interval_s;
            config["alpha"] = cfg.alpha;
            j["config"] = config;
            j["trace_packets"] = trace.size();
            j["sampled_packets"] = sampled.size();

            nlohmann::json digests;
            std::vector<std::string> names = outputs.written();
            std::sort(names.begin(), names.end());
            for (const auto& name : names) digests[name] = fnv1a64_file(outputs.dir() / name);
            j["outputs"] = digests;

            auto out = outputs.open("manifest.json");
            out << j.dump(2) << '\n';
            out.flush();
            if (!out) throw std::runtime_error("manifest write failed");
            return 0;
        });
    } catch (...) {
        outputs.discard_all();
        throw;
    }
}

}  // namespace flowlab
