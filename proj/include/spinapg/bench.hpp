#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spinapg/apg.hpp"
#include "spinapg/qp_model.hpp"

namespace spinapg {

/// One solver invocation, fully specified.
struct RunParams {
    std::string method = "spinapg";  // spinapg | slb-aifb | oifb | ifista
    double upsilon = 1.0;
    double power = 3.1;
    double tau = 0.9;
    double c_coef = 1e-3;  // multiple of L
    std::string theta = "nesterov";  // nesterov | cd
    double alpha = 4.0;              // cd schedule parameter
    double kkt_tol = 1e-6;
    long max_outer = 20000;
};

ThetaSchedule make_theta(const RunParams& p);

/// Runs one method on an augmented instance.
SolverReport execute_run(const AugmentedQp& aug, const RunParams& p);

struct ExperimentConfig {
    std::vector<int> n_list;
    LambdaRule rule = LambdaRule::Zero;
    std::vector<std::string> methods;
    // (upsilon, power) grid for the absolute-criterion methods.
    std::vector<std::pair<double, double>> upsilon_power = {{1.0, 3.1}};
    // tau grid for I-FISTA.
    std::vector<double> taus = {0.9};
    double c_coef = 1e-3;
    std::string theta = "nesterov";
    double alpha = 4.0;
    std::vector<std::uint64_t> seeds;
    double kkt_tol = 1e-6;
    long max_outer = 20000;
    std::string output_dir = "bench_out";
    int jobs = 1;
};

/// Throws std::invalid_argument before any run when the config is unusable
/// (empty n_list / methods / seeds, unknown method name, bad grids).
void validate(const ExperimentConfig& config);

ExperimentConfig config_from_json_file(const std::string& path);

/// Runs the method x parameter x n x seed grid, writing summary.csv,
/// runs.csv, trace_<runid>.csv and report_<runid>.json into output_dir.
/// Stalled runs are recorded with their status, never dropped.
void run_table(const ExperimentConfig& config);

/// Deterministic single run from an instance file; the returned JSON omits
/// wall-time fields unless include_times is set, so repeated invocations are
/// byte-identical.
std::string replay(const std::string& instance_path, const RunParams& params,
                   bool include_times = false);

std::string report_to_json(const SolverReport& report, bool include_times);

/// 17-significant-digit float formatting used across all emitted files.
std::string format_float(double v);

}  // namespace spinapg
