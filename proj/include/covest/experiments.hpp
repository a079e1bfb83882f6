#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "covest/decoupling.hpp"
#include "covest/models.hpp"

namespace covest {

enum class ExperimentKind { scaling, frame, coupon, baiyin, structure_demo, decouple_demo, truncation };

std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

/// Flat result record; one metric per row. Summary rows (medians, fractions,
/// fitted constants) carry trial = -1.
struct ResultRow {
    std::string experiment;
    std::size_t n = 0;
    std::size_t N = 0;
    long trial = 0;
    std::uint64_t seed = 0;
    std::string metric;
    double value = 0.0;
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::scaling;
    std::string model_json; // empty -> experiment default
    std::vector<std::size_t> n_grid;
    std::vector<std::size_t> N_grid;        // absolute sample counts
    std::vector<std::size_t> N_over_n_grid; // ratios, combined with n_grid
    std::vector<double> beta_grid;          // baiyin aspect ratios
    std::vector<std::size_t> M_grid;        // frame sizes (multiples resolved)
    int trials = 1;
    std::uint64_t master_seed = 1;
    std::string output_path;
    int jobs = 1;

    // analysis knobs
    double q = 6.0;
    double t = 2.0;
    double p = 8.0;
    std::size_t n_directions = 32;

    // structure / decouple demos
    double alpha = 0.9;
    double K = 0.8;
    double divergence_c = 0.4;
    std::vector<double> sequence; // explicit b for the structure demo
    std::string lambda_kind = "uniform_small"; // zero|uniform_small|one_hot
    std::size_t m = 256;
    std::optional<DecouplingParams> decouple_params;

    std::string to_json() const;
    static ExperimentConfig from_json(const std::string& text);
};

/// Stable per-trial seed: every row can be replayed in isolation no matter
/// how the grid is ordered or scheduled.
std::uint64_t trial_seed(std::uint64_t master, const std::string& experiment, std::size_t n,
                         std::size_t N, long trial);

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t points_used = 0;
};

/// OLS of log2(median value) against log2(x) where x is "n_over_N", "n" or
/// "N"; rows with non-positive values are excluded with a warning on stderr.
FitResult fit_exponent(const std::vector<ResultRow>& rows, const std::string& x_field,
                       const std::string& metric);

/// The underlying log-log fit on pre-grouped samples (x -> observations).
FitResult fit_loglog(const std::map<double, std::vector<double>>& groups);

struct ExperimentResult {
    std::vector<ResultRow> rows;
    std::optional<FitResult> fit;
    std::string report_json; // experiment-specific extras (certificates etc.)
};

ExperimentResult run_scaling_sweep(const ExperimentConfig& cfg);
ExperimentResult run_frame_subsample(const ExperimentConfig& cfg);
ExperimentResult run_coupon(const ExperimentConfig& cfg);
ExperimentResult run_baiyin(const ExperimentConfig& cfg);
ExperimentResult run_structure_demo(const ExperimentConfig& cfg);
ExperimentResult run_decouple_demo(const ExperimentConfig& cfg);
ExperimentResult run_truncation(const ExperimentConfig& cfg);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// CSV with the fixed header experiment,n,N,trial,seed,metric,value; floats
/// printed with 17 significant digits so reruns are byte-identical.
std::string csv_string(const std::vector<ResultRow>& rows);
void write_csv(const std::string& path, const std::vector<ResultRow>& rows);

} // namespace covest
