#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "covest/linalg.hpp"
#include "covest/sequences.hpp"
#include "covest/structure.hpp"

namespace covest {

struct DecouplingParams {
    double r = 1.0;
    double r_prime = 4.0;
    double r_double_prime = 4.0;
    double delta = 0.25;
    double alpha = 0.9;
    double C_alpha = 4.0; // C'_alpha = C_alpha / alpha
    double K1 = 1.0, K2 = 1.0, K3 = 1.0;
    std::size_t N = 0; // ambient sample count; 0 means m
    double tol = 1e-7;

    // structure-extraction configuration for the internal call
    double structure_K = 1.0;
    double structure_divergence_c = 0.5;
    double structure_l_large_factor = 0.2;

    double y_norm_multiple = 0.0; // acceptance ||ybar||^2 <= mult * l n1/n2; 0 -> 16/alpha
    int max_retries = 10;
    int min_norm_max_iter = 400000;

    double c_alpha_prime() const { return C_alpha / alpha; }
    double y_norm_mult() const { return y_norm_multiple > 0 ? y_norm_multiple : 16.0 / alpha; }

    std::string to_json() const;
    static DecouplingParams from_json(const std::string& text);
};

/// Separation witness over the scaled points X_i/a_i: runs the min-norm-point
/// solver and normalizes. Succeeds when the minimum-norm point v of
/// conv(X_i/a_i) has ||v|| >= 1 - tol, which holds whenever some unit x has
/// <X_i/a_i, x> = 1 for all i.
struct WitnessResult {
    Vec x_bar;       // unit vector in conv(K u 0)
    CoeffSeq lambda; // weights with sum <= 1 (+tol), aligned with the inputs
    double v_norm = 0.0;
};

class NoWitnessError : public std::runtime_error {
public:
    explicit NoWitnessError(const std::string& w, double v_norm)
        : std::runtime_error(w), v_norm(v_norm) {}
    double v_norm;
};

WitnessResult separation_witness(const std::vector<Vec>& X, std::span<const double> a, double tol,
                                 int max_iter = 400000);

/// One Maurey empirical selection: `draws` i.i.d. picks V_j with
/// P{V_j = X_i/a_i} = lambda_i over the index list I1_prime (remaining mass
/// on 0), Y_j = V_j + residual_sum, y_bar their average. `drawn[j]` records
/// the picked index (-1 for the zero atom) for diagonal-collision detection.
struct MaureySelection {
    Vec y_bar;
    std::vector<long> drawn;
};

MaureySelection maurey_select(const std::vector<Vec>& X, std::span<const double> lambda,
                              std::span<const double> a,
                              const std::vector<std::size_t>& I1_prime, int draws,
                              const Vec& residual_sum, std::uint64_t seed);

struct DecouplingCertificate {
    std::vector<std::size_t> I;
    std::vector<std::size_t> J;
    Vec y;            // unit vector in span(X_j : j in J)
    double threshold; // K3^2 (N/|I|)^{1/r''}
    std::vector<long> selection_record;
    double ybar_norm2 = 0.0;
    std::vector<std::pair<std::size_t, double>> Z; // per-candidate Z_k
    int retries_used = 0;
    StructureCertificate structure;
    RefinedSet refined;

    std::string to_json() const;
};

enum class DecoupleStatus { success, precondition_largeness, no_witness, selection_failed };

std::string to_string(DecoupleStatus s);

struct DecoupleResult {
    DecoupleStatus status = DecoupleStatus::selection_failed;
    std::string message;
    std::optional<DecouplingCertificate> certificate;

    bool ok() const { return status == DecoupleStatus::success; }
};

/// Full decoupling pipeline: coefficients a_i = <X_i, x>, structure
/// extraction on b_i = (a_i/K3)^2 / nbar, separation witness, thresholded
/// Maurey selection with diagonal removal, and a-posteriori certification.
/// The randomized selection is retried with derived substreams up to
/// params.max_retries times.
DecoupleResult decouple(const std::vector<Vec>& X, const Vec& x, const DecouplingParams& params,
                        std::uint64_t seed);

struct DecouplingReport {
    std::vector<CheckItem> items;
    bool all_pass = false;
    std::string to_json() const;
};

/// Independent verification of a certificate: disjointness, sizes, unit norm,
/// span membership (least-squares residual), and the inner-product threshold,
/// with numeric slack per condition.
DecouplingReport check_decoupling(const DecouplingCertificate& cert, const std::vector<Vec>& X,
                                  const DecouplingParams& params);

/// Instance family used by the demo and the acceptance suite: layered
/// clusters aligned with a common unit direction u (the deepest cluster is an
/// exact near-duplicate family), padded with isotropic noise, x = u.
struct DecoupleInstance {
    std::vector<Vec> X;
    Vec x;
};

DecoupleInstance make_near_duplicate_instance(std::size_t n, std::size_t m, std::uint64_t seed);

} // namespace covest
