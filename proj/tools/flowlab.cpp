// flowlab: trace-driven packet-sampling laboratory.
//
// Subcommands compose through the CSV contracts, so any stage can be run,
// inspected and re-run from files:
//   generate -> trace csv
//   sample   -> trace csv
//   flows    -> flow csv
//   bins     -> binned-series csv (per width)
//   moments  -> moment-table csv
//   cdf      -> value,cum_prob csv
//   kstest   -> two-sample KS on single-column sample files
//   run      -> the whole pipeline into a report directory

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "flowlab/csv.hpp"
#include "flowlab/distributions.hpp"
#include "flowlab/flow_cache.hpp"
#include "flowlab/inversion.hpp"
#include "flowlab/report.hpp"
#include "flowlab/sampler.hpp"
#include "flowlab/stats.hpp"
#include "flowlab/synthetic.hpp"
#include "flowlab/trace_io.hpp"

namespace {

using namespace flowlab;

void add_synthetic_flags(CLI::App* cmd, SyntheticConfig& cfg) {
    cmd->add_option("--duration", cfg.duration_s, "trace length in seconds")
        ->capture_default_str();
    cmd->add_option("--flow-rate", cfg.flow_arrival_rate, "flow arrivals per second")
        ->capture_default_str();
    cmd->add_option("--pareto-alpha", cfg.pareto_alpha, "shape of packets-per-flow tail")
        ->capture_default_str();
    cmd->add_option("--pareto-xmin", cfg.pareto_xmin, "minimum packets per flow")
        ->capture_default_str();
    cmd->add_option("--pkt-small", cfg.pkt_size_small, "small packet size, octets")
        ->capture_default_str();
    cmd->add_option("--pkt-large", cfg.pkt_size_large, "large packet size, octets")
        ->capture_default_str();
    cmd->add_option("--large-prob", cfg.large_pkt_prob, "probability of the large size")
        ->capture_default_str();
    cmd->add_option("--mean-ipg-ms", cfg.mean_ipg_ms, "mean intra-flow packet gap, ms")
        ->capture_default_str();
    cmd->add_option("--tcp-fraction", cfg.tcp_fraction, "fraction of TCP flows")
        ->capture_default_str();
}

void add_cache_flags(CLI::App* cmd, CacheConfig& cfg, std::optional<std::size_t>& capacity) {
    cmd->add_option("--inactive-timeout", cfg.inactive_timeout_s, "idle expiry, seconds")
        ->capture_default_str();
    cmd->add_option("--active-timeout", cfg.active_timeout_s, "long-lived expiry, seconds")
        ->capture_default_str();
    cmd->add_option("--capacity", capacity, "cache entry limit (default: unlimited)");
    cmd->add_option("--high-watermark", cfg.high_watermark, "pressure threshold fraction")
        ->capture_default_str();
    cmd->add_option("--evict-fraction", cfg.evict_fraction, "entries aged per pressure event")
        ->capture_default_str();
    cmd->add_flag("--tcp-end,!--no-tcp-end", cfg.tcp_end_expiry, "expire flows on FIN/RST")
        ->capture_default_str();
}

struct SamplingFlags {
    std::uint64_t n = 1000;
    std::uint64_t phase = 0;
    double q = 0;
    bool q_given = false;
};

void add_sampling_flags(CLI::App* cmd, SamplingFlags& f) {
    auto* n = cmd->add_option("--sample-n", f.n, "systematic period: keep 1 in n")
                  ->capture_default_str();
    cmd->add_option("--sample-phase", f.phase, "index of first sampled packet")
        ->capture_default_str();
    auto* q = cmd->add_option("--sample-q", f.q, "bernoulli keep probability");
    q->excludes(n);
}

SamplingSpec to_spec(const SamplingFlags& f, std::uint64_t seed) {
    SamplingSpec spec;
    if (f.q_given) {
        spec.mode = SamplingMode::bernoulli;
        spec.q = f.q;
        spec.seed = seed;
    } else {
        spec.mode = SamplingMode::systematic;
        spec.n = f.n;
        spec.phase = f.phase;
        spec.q = f.n > 0 ? 1.0 / static_cast<double>(f.n) : 1.0;
    }
    return spec;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

int cmd_kstest(const std::string& file_a, const std::string& file_b, double alpha) {
    const auto a = read_sample_column(file_a);
    const auto b = read_sample_column(file_b);
    if (a.empty() || b.empty()) throw std::runtime_error("kstest: empty sample file");
    const KsResult r = ks_test(a, b, alpha);
    std::cout << "d_statistic=" << csv::format_double(r.statistic_d) << '\n'
              << "n1=" << r.n1 << '\n'
              << "n2=" << r.n2 << '\n'
              << "critical=" << csv::format_double(r.critical_value) << '\n'
              << "alpha=" << csv::format_double(r.alpha) << '\n'
              << "reject=" << (r.reject ? "true" : "false") << '\n';
    return r.reject ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flowlab: packet sampling, flow-record creation and inversion-error laboratory"};
    app.require_subcommand(1);

    const bool is_kstest = argc > 1 && std::string(argv[1]) == "kstest";
    int exit_code = 0;

    std::uint64_t seed = 1;

    // generate
    auto* gen = app.add_subcommand("generate", "write a synthetic trace");
    SyntheticConfig gen_cfg;
    std::string gen_out;
    add_synthetic_flags(gen, gen_cfg);
    gen->add_option("--seed", seed, "generator seed")->envname("FLOWLAB_SEED")->capture_default_str();
    gen->add_option("--out", gen_out, "output trace csv")->required();
    gen->callback([&] {
        gen_cfg.seed = seed;
        write_trace(generate_synthetic(gen_cfg), gen_out);
    });

    // sample
    auto* smp = app.add_subcommand("sample", "sample a trace");
    std::string smp_trace, smp_out;
    SamplingFlags smp_flags;
    smp->add_option("--trace", smp_trace, "input trace csv")->required();
    add_sampling_flags(smp, smp_flags);
    smp->add_option("--seed", seed, "bernoulli sampling seed")->envname("FLOWLAB_SEED");
    smp->add_option("--out", smp_out, "output trace csv")->required();
    smp->callback([&] {
        smp_flags.q_given = smp->count("--sample-q") > 0;
        const auto trace = read_trace(smp_trace);
        write_trace(apply_sampling(trace, to_spec(smp_flags, seed)), smp_out);
    });

    // flows
    auto* flw = app.add_subcommand("flows", "build flow records from a trace");
    std::string flw_trace, flw_out;
    CacheConfig flw_cache;
    std::optional<std::size_t> flw_capacity;
    flw->add_option("--trace", flw_trace, "input trace csv")->required();
    add_cache_flags(flw, flw_cache, flw_capacity);
    flw->add_option("--out", flw_out, "output flow csv")->required();
    flw->callback([&] {
        flw_cache.capacity = flw_capacity;
        const auto trace = read_trace(flw_trace);
        write_flows(build_flows(trace, flw_cache), flw_out);
    });

    // bins
    auto* bns = app.add_subcommand("bins", "bin byte/packet rates, with inverted estimates");
    std::string bns_trace, bns_sampled, bns_out;
    SamplingFlags bns_flags;
    std::vector<double> bns_widths{30};
    bns->add_option("--trace", bns_trace, "original trace csv")->required();
    bns->add_option("--sampled", bns_sampled, "sampled trace csv (default: the original)");
    add_sampling_flags(bns, bns_flags);
    bns->add_option("--bins", bns_widths, "bin widths in seconds")->delimiter(',')->capture_default_str();
    bns->add_option("--out", bns_out, "output directory")->required();
    bns->callback([&] {
        bns_flags.q_given = bns->count("--sample-q") > 0;
        const auto trace = read_trace(bns_trace);
        if (trace.empty()) throw std::runtime_error("empty trace");
        std::vector<PacketRecord> sampled;
        double q = 1.0;
        if (!bns_sampled.empty()) {
            sampled = read_trace(bns_sampled);
            if (!bns_flags.q_given && bns->count("--sample-n") == 0)
                throw std::runtime_error("--sampled needs --sample-n or --sample-q for inversion");
            q = bns_flags.q_given ? bns_flags.q : 1.0 / static_cast<double>(bns_flags.n);
        } else {
            sampled = trace;
        }
        const std::int64_t start = trace.front().ts_us;
        const std::int64_t end = trace.back().ts_us + 1;
        std::filesystem::create_directories(bns_out);
        for (double w : bns_widths) {
            const auto orig = bin_stream(trace, w, start, end);
            const auto samp = bin_stream(sampled, w, start, end);
            const auto dn = invert_series(std::span<const std::uint64_t>(samp.d), q);
            const auto pn = invert_series(std::span<const std::uint64_t>(samp.p), q);
            auto out = open_out((std::filesystem::path(bns_out) / bins_csv_name(w)).string());
            write_binned_csv(out, orig, dn, pn);
        }
    });

    // moments
    auto* mom = app.add_subcommand("moments", "moment table from a binned-series csv");
    std::string mom_in, mom_out;
    double mom_bin_s = 0;
    mom->add_option("--input", mom_in, "binned-series csv")->required();
    mom->add_option("--bin-s", mom_bin_s, "bin width label (default: inferred from bin starts)");
    mom->add_option("--out", mom_out, "output moment csv")->required();
    mom->callback([&] {
        const BinnedCsv b = read_binned_csv(mom_in);
        if (b.d.size() < 2) throw std::runtime_error("need at least 2 bins");
        double w = mom_bin_s;
        if (w <= 0) w = static_cast<double>(b.bin_start_us[1] - b.bin_start_us[0]) / 1e6;

        BinnedSeries orig;
        orig.bin_width_s = w;
        orig.start_ts_us = b.bin_start_us.front();
        orig.d.assign(b.d.size(), 0);
        orig.p.assign(b.p.size(), 0);
        for (std::size_t i = 0; i < b.d.size(); ++i) {
            orig.d[i] = static_cast<std::uint64_t>(b.d[i]);
            orig.p[i] = static_cast<std::uint64_t>(b.p[i]);
        }
        InvertedSeries dn{b.dn, 1.0}, pn{b.pn, 1.0};
        auto out = open_out(mom_out);
        write_moment_rows_csv(out, table_rows(orig, dn, pn));
    });

    // cdf
    auto* cdf_cmd = app.add_subcommand("cdf", "empirical CDF of packet or flow sizes");
    std::string cdf_what = "packet-size", cdf_trace, cdf_flows, cdf_out;
    cdf_cmd->add_option("--what", cdf_what, "packet-size | flow-packets | flow-bytes")
        ->check(CLI::IsMember({"packet-size", "flow-packets", "flow-bytes"}))
        ->capture_default_str();
    cdf_cmd->add_option("--trace", cdf_trace, "trace csv (for packet-size)");
    cdf_cmd->add_option("--flows", cdf_flows, "flow csv (for flow-*)");
    cdf_cmd->add_option("--out", cdf_out, "output cdf csv")->required();
    cdf_cmd->callback([&] {
        Ecdf e;
        if (cdf_what == "packet-size") {
            if (cdf_trace.empty()) throw std::runtime_error("packet-size cdf needs --trace");
            e = packet_size_cdf(read_trace(cdf_trace));
        } else {
            if (cdf_flows.empty()) throw std::runtime_error("flow cdf needs --flows");
            const auto flows = read_flows(cdf_flows);
            e = flow_size_cdf(flows, cdf_what == "flow-packets" ? FlowMetric::packets
                                                                : FlowMetric::bytes);
        }
        auto out = open_out(cdf_out);
        write_cdf_csv(out, e);
    });

    // kstest
    auto* kst = app.add_subcommand("kstest", "two-sample KS test on single-column sample files");
    std::string kst_a, kst_b;
    double kst_alpha = 0.05;
    kst->add_option("file_a", kst_a, "first sample file")->required();
    kst->add_option("file_b", kst_b, "second sample file")->required();
    kst->add_option("--alpha", kst_alpha, "significance level")->capture_default_str();
    kst->callback([&] { exit_code = cmd_kstest(kst_a, kst_b, kst_alpha); });

    // run
    auto* run = app.add_subcommand("run", "full pipeline into a report directory");
    ExperimentConfig run_cfg;
    std::string run_trace;
    SamplingFlags run_flags;
    std::optional<std::size_t> run_capacity;
    run->add_option("--trace", run_trace, "input trace csv (default: synthetic)");
    add_synthetic_flags(run, run_cfg.synthetic);
    run->add_option("--seed", seed, "generator / sampling seed")
        ->envname("FLOWLAB_SEED")
        ->capture_default_str();
    add_sampling_flags(run, run_flags);
    add_cache_flags(run, run_cfg.cache, run_capacity);
    run->add_option("--bins", run_cfg.bin_widths_s, "bin widths in seconds")
        ->delimiter(',')
        ->capture_default_str();
    run->add_option("--ks-interval", run_cfg.ks_interval_s, "KS interval width in seconds")
        ->capture_default_str();
    run->add_option("--alpha", run_cfg.alpha, "KS significance level")->capture_default_str();
    run->add_option("--out", run_cfg.out_dir, "report directory")->required();
    run->callback([&] {
        run_flags.q_given = run->count("--sample-q") > 0;
        if (!run_trace.empty()) run_cfg.trace_path = run_trace;
        run_cfg.synthetic.seed = seed;
        run_cfg.sampling = to_spec(run_flags, seed);
        run_cfg.cache.capacity = run_capacity;
        run_experiment(run_cfg);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return is_kstest && code != 0 ? 2 : code;
    } catch (const StageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return is_kstest ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return is_kstest ? 2 : 1;
    }
    return exit_code;
}
