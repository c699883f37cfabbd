// Compares the OpenMP kernels against their serial reference twins on a
// synthetic workload and verifies that both produce identical results.
//
//   flowlab_bench [--duration S] [--flow-rate R] [--seed N] [--repeat K]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "flowlab/flow_cache.hpp"
#include "flowlab/sampler.hpp"
#include "flowlab/stats.hpp"
#include "flowlab/synthetic.hpp"
#include "reference.hpp"

using namespace flowlab;

namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
double time_best_ms(int repeat, F&& f) {
    double best = 1e300;
    for (int i = 0; i < repeat; ++i) {
        const auto t0 = Clock::now();
        f();
        const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        if (ms < best) best = ms;
    }
    return best;
}

void report(const char* kernel, double serial_ms, double parallel_ms, bool equal) {
    std::printf("%-22s %12.1f %12.1f %9.2fx   %s\n", kernel, serial_ms, parallel_ms,
                serial_ms / parallel_ms, equal ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    SyntheticConfig cfg;
    cfg.duration_s = 600;
    cfg.flow_arrival_rate = 200;
    cfg.seed = 7;
    int repeat = 3;

    for (int i = 1; i + 1 < argc; i += 2) {
        if (!std::strcmp(argv[i], "--duration")) cfg.duration_s = std::atof(argv[i + 1]);
        else if (!std::strcmp(argv[i], "--flow-rate")) cfg.flow_arrival_rate = std::atof(argv[i + 1]);
        else if (!std::strcmp(argv[i], "--seed")) cfg.seed = std::strtoull(argv[i + 1], nullptr, 10);
        else if (!std::strcmp(argv[i], "--repeat")) repeat = std::atoi(argv[i + 1]);
        else {
            std::fprintf(stderr, "unknown flag %s\n", argv[i]);
            return 2;
        }
    }

#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (built without OpenMP)\n");
#endif

    const auto trace = generate_synthetic(cfg);
    std::printf("workload: %zu packets over %.0f s (seed %llu)\n\n", trace.size(), cfg.duration_s,
                static_cast<unsigned long long>(cfg.seed));
    std::printf("%-22s %12s %12s %10s\n", "kernel", "serial ms", "parallel ms", "speedup");

    bool all_equal = true;

    {
        std::vector<PacketRecord> serial_out, parallel_out;
        const double s = time_best_ms(repeat, [&] { serial_out = ref::generate_synthetic(cfg); });
        const double p = time_best_ms(repeat, [&] { parallel_out = generate_synthetic(cfg); });
        const bool eq = serial_out == parallel_out;
        all_equal &= eq;
        report("generate_synthetic", s, p, eq);
    }

    {
        std::vector<PacketRecord> serial_out, parallel_out;
        const double s = time_best_ms(repeat, [&] { serial_out = ref::systematic_sample(trace, 1000, 0); });
        const double p = time_best_ms(repeat, [&] { parallel_out = systematic_sample(trace, 1000, 0); });
        const bool eq = serial_out == parallel_out;
        all_equal &= eq;
        report("systematic_sample", s, p, eq);
    }

    {
        std::vector<PacketRecord> serial_out, parallel_out;
        const double s = time_best_ms(repeat, [&] { serial_out = ref::bernoulli_sample(trace, 0.001, 9); });
        const double p = time_best_ms(repeat, [&] { parallel_out = bernoulli_sample(trace, 0.001, 9); });
        const bool eq = serial_out == parallel_out;
        all_equal &= eq;
        report("bernoulli_sample", s, p, eq);
    }

    {
        const std::int64_t start = trace.front().ts_us;
        const std::int64_t end = trace.back().ts_us + 1;
        BinnedSeries serial_out, parallel_out;
        const double s = time_best_ms(repeat, [&] { serial_out = ref::bin_stream(trace, 1, start, end); });
        const double p = time_best_ms(repeat, [&] { parallel_out = bin_stream(trace, 1, start, end); });
        const bool eq = serial_out.d == parallel_out.d && serial_out.p == parallel_out.p &&
                        serial_out.excluded == parallel_out.excluded;
        all_equal &= eq;
        report("bin_stream (1s bins)", s, p, eq);
    }

    {
        // flow-cache throughput (stateful, serial by design)
        std::vector<FlowRecord> flows;
        const double s = time_best_ms(repeat, [&] { flows = build_flows(trace, CacheConfig{}); });
        std::printf("%-22s %12.1f %12s %10s   (%zu records, %.1f Mpkt/s)\n", "build_flows", s, "-",
                    "-", flows.size(), static_cast<double>(trace.size()) / s / 1e3);
    }

    if (!all_equal) {
        std::printf("\nserial/parallel outputs diverged\n");
        return 1;
    }
    return 0;
}
