#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "covest/linalg.hpp"

namespace covest {

/// Tight frame: M >= n vectors with (1/M) sum x_j x_j^T = I (to 1e-10 in
/// operator norm).
struct Frame {
    std::vector<Vec> points;
    std::size_t dim() const { return points.empty() ? 0 : points[0].size(); }
    std::size_t size() const { return points.size(); }
};

/// Whitening construction: S = (1/M) sum x x^T, returns {L^{-1} x_j} for the
/// Cholesky factor S = L L^T. Throws ContractError naming the deficient rank
/// if the input does not span R^n.
Frame make_tight_frame(const std::vector<Vec>& raw_points);

/// op_norm((1/M_effective) sum x x^T - I).
double parseval_defect(const std::vector<Vec>& frame_subset, std::size_t M_effective);

enum class ModelKind { gaussian, cube, cross_polytope, simplex, discrete_frame, pareto_product };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

/// A named distribution on R^n with a sampler and declared moment parameters.
/// All built-in kinds are mean zero and isotropic (covariance = identity);
/// the scale constants that make this true are calibrated numerically once at
/// construction and cached (calibration seed recorded).
class VectorModel {
public:
    ModelKind kind = ModelKind::gaussian;
    std::size_t n = 1;
    std::optional<double> q_declared;
    std::optional<double> K_declared; // ||X||_2 <= K sqrt(n) a.s., when bounded
    std::optional<double> L_declared;

    // pareto_product parameters
    double q_tail = 6.0;
    bool truncate = false;
    double trunc_K = 4.0; // pre-standardization truncation radius factor

    std::shared_ptr<const Frame> frame; // for discrete_frame

    std::uint64_t model_seed = 0; // used for generated frames

    // calibration results
    double radius_scale = 1.0;          // cross_polytope / simplex radius factor
    double post_truncation_std = 1.0;   // pareto with truncation
    std::uint64_t calibration_seed = 0;
    std::size_t calibration_samples = 0;

    static VectorModel gaussian(std::size_t n);
    static VectorModel cube(std::size_t n);
    static VectorModel cross_polytope(std::size_t n, std::size_t calibration_samples = 1000000);
    static VectorModel simplex(std::size_t n, std::size_t calibration_samples = 1000000);
    static VectorModel discrete_frame(std::shared_ptr<const Frame> frame);
    static VectorModel scaled_basis(std::size_t n); // frame model over sqrt(n) e_j
    static VectorModel pareto_product(std::size_t n, double q_tail, bool truncate = false,
                                      double trunc_K = 4.0,
                                      std::size_t calibration_samples = 200000);

    /// Draw one sample, consuming the rng sequentially.
    Vec draw(class Rng& rng) const;

    std::string to_json() const;
    static VectorModel from_json(const std::string& json_text);

private:
    // simplex vertices (n+1, centered), built at construction
    std::shared_ptr<const std::vector<Vec>> simplex_vertices_;
    std::shared_ptr<const std::vector<double>> frame_cdf_; // sampling weights ~ ||x_j||^2

    void finalize();
};

/// N i.i.d. draws; bit-exact for fixed (model, N, seed).
std::vector<Vec> sample(const VectorModel& model, std::size_t N, std::uint64_t seed);

struct MomentCertificate {
    double K_hat = 0.0; // max ||X||_2 / sqrt(n)
    double L_hat = 0.0; // max over probe directions of (mean |<X,x>|^q)^{1/q}
    double q = 0.0;
    std::size_t n_samples = 0;
    std::size_t n_directions = 0;
    std::uint64_t seed = 0;
};

/// Empirical moment certificate: K_hat from the sample radii, L_hat from
/// finitely many random unit probe directions. L_hat is a lower estimate of
/// the true directional supremum, never claimed exact.
MomentCertificate certify_moments(const VectorModel& model, double q, std::size_t n_samples,
                                  std::size_t n_directions, std::uint64_t seed);

} // namespace covest
