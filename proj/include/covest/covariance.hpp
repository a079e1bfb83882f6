#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "covest/linalg.hpp"
#include "covest/models.hpp"

namespace covest {

/// A drawn sample with enough metadata to replay or resample it.
struct SampleSet {
    std::vector<Vec> samples;
    std::string model_json;
    std::uint64_t seed = 0;

    std::size_t n() const { return samples.empty() ? 0 : samples[0].size(); }
    std::size_t N() const { return samples.size(); }
};

SampleSet draw_sample_set(const VectorModel& model, std::size_t N, std::uint64_t seed);

/// (1/N) sum X_i X_i^T.
SymMat sample_covariance(const std::vector<Vec>& samples);
SymMat sample_covariance(const SampleSet& s);

/// op_norm(sigma_N - sigma).
double estimation_error(const SymMat& sigma_N, const SymMat& sigma);

/// The Bernstein + eps-net prediction sqrt((4/c) log2(2/delta) n/N).
double subgaussian_predicted_error(std::size_t n, std::size_t N, double delta,
                                   double c_bernstein = 0.25);

/// Indices with |<X_i, x>| >= B.
std::vector<std::size_t> large_coeff_set(const SampleSet& s, const Vec& x, double B);

struct ProfileRow {
    std::size_t subset_size = 0;
    double lhs_max = 0.0;  // largest observed LHS over subsets and directions
    double bound = 0.0;    // the comparison quantity at that size (C = 1)
    double c_hat = 0.0;    // smallest C with LHS <= C * bound among probes
};

/// Weak-l2 profile: sup over random subsets E and probe directions of
/// ||(<X_i,x>)_{i in E}||_{2,inf}^2 against n + t^2 (N/|E|)^{4/q} |E|.
/// Directions are random probes plus the top eigenvector of sum_E X X^T;
/// reported maxima are lower estimates of the true suprema.
std::vector<ProfileRow> weak_l2_profile(const SampleSet& s,
                                        const std::vector<std::size_t>& subset_sizes,
                                        std::size_t n_directions, double t, double q,
                                        std::uint64_t seed);

/// Almost-orthogonality profile: max over sampled subsets E and pivots k of
/// (1/|E|) sum_{i in E, i != k} <X_i, X_k>^2 against t^2 (N/|E|)^{4/q} n.
std::vector<ProfileRow> orthogonality_profile(const SampleSet& s,
                                              const std::vector<std::size_t>& subset_sizes,
                                              double t, double q, std::size_t trials = 8);

struct TruncationReport {
    double B = 0.0;
    double I1_term = 0.0;
    double I2_term = 0.0;
    double I3_term = 0.0;
    double I3_analytic_bound = 0.0; // B^{2-q}
    double t = 0.0;
    std::map<std::size_t, std::size_t> E_B_sizes; // probe direction -> |E_B|
};

/// Truncation split at level B = (N/n)^{2/q}: the bounded part B sqrt(n/N),
/// the empirical large-coefficient quadratic form, and the resampled tail
/// expectation, each maximized over probe directions.
TruncationReport truncation_split(const SampleSet& s, double q, double t,
                                  std::size_t n_directions, std::uint64_t seed,
                                  std::size_t resample_per_direction = 100000);

struct SubsetNormRow {
    std::size_t size = 0;
    double max_norm = 0.0;
    double max_ratio = 0.0; // norm / ((log2 log2 |E|)^2 [n + (N/|E|)^{4/p} |E|])
};

/// Uniform subset-norm sweep: for random subsets E of each size, the exact
/// operator norm of sum_{i in E} X_i X_i^T against the profile bound.
std::vector<SubsetNormRow> subset_norm_sweep(const SampleSet& s,
                                             const std::vector<std::size_t>& sizes,
                                             std::size_t trials, double p, double q, double t,
                                             std::uint64_t seed);

std::string profile_to_json(const std::vector<ProfileRow>& rows);
std::string subset_norms_to_json(const std::vector<SubsetNormRow>& rows);
std::string to_json(const TruncationReport& rep);

/// Binary round-trip: header {n, N, seed, model JSON}, then row-major
/// little-endian doubles.
void write_sample_set(const std::string& path, const SampleSet& s);
SampleSet read_sample_set(const std::string& path);

} // namespace covest
