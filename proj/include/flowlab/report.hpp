#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowlab/flow_cache.hpp"
#include "flowlab/sampler.hpp"
#include "flowlab/synthetic.hpp"

namespace flowlab {

// Full pipeline configuration: trace source, sampling, cache behaviour and
// report parameters.
struct ExperimentConfig {
    std::optional<std::string> trace_path;  // absent: generate synthetically
    SyntheticConfig synthetic;
    SamplingSpec sampling{SamplingMode::systematic, 1000, 1.0 / 1000.0, 0, 0};
    CacheConfig cache;
    std::vector<double> bin_widths_s{30, 120, 300};
    double ks_interval_s = 30;
    double alpha = 0.05;
    std::string out_dir;
};

// Pipeline failures carry the stage that raised them.
struct StageError : std::runtime_error {
    StageError(const std::string& stage_name, const std::string& what)
        : std::runtime_error("stage " + stage_name + ": " + what), stage(stage_name) {}
    std::string stage;
};

// Runs the whole pipeline and writes the report files into cfg.out_dir:
// per-width binned series, the moment table, the error summary, packet- and
// flow-size CDFs for the original and sampled streams, the per-interval KS
// report and a manifest. Identical configs (out_dir aside) produce
// byte-identical files; on error, partial outputs are removed.
void run_experiment(const ExperimentConfig& cfg);

std::string bins_csv_name(double width_s);

}  // namespace flowlab
