#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace covest {

using Vec = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
void scale(Vec& a, double s);
void axpy(Vec& y, double a, std::span<const double> x); // y += a*x

/// Dense symmetric n x n matrix, row-major flat storage, value semantics.
class SymMat {
public:
    SymMat() = default;
    explicit SymMat(std::size_t n) : n_(n), a_(n * n, 0.0) {}

    static SymMat identity(std::size_t n);
    static SymMat diagonal(std::span<const double> d);

    std::size_t dim() const { return n_; }
    double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
    const std::vector<double>& data() const { return a_; }
    std::vector<double>& data() { return a_; }

    /// y = A x
    void apply(std::span<const double> x, Vec& y) const;

    /// A += w * x x^T (used by covariance accumulation). Fills both triangles.
    void add_outer(std::span<const double> x, double w);

    /// max_i sum_j |a_ij|; cheap upper bound on the operator norm.
    double inf_norm_bound() const;

    /// Largest relative asymmetry |a_ij - a_ji| / scale.
    double symmetry_defect() const;

    SymMat& operator-=(const SymMat& other);
    SymMat& operator+=(const SymMat& other);

private:
    std::size_t n_ = 0;
    std::vector<double> a_;
};

SymMat operator-(SymMat a, const SymMat& b);

/// Operator norm (largest |eigenvalue|) of a symmetric matrix to relative
/// accuracy `tol`. Plain power iteration with a residual-based stopping rule;
/// when the residual stagnates (the +/-lambda ambiguous case), restarts on the
/// shifted matrices A + cI and cI - A whose top eigenvalues are unambiguous.
/// Throws ContractError for asymmetric input, ConvergenceError (carrying the
/// best estimate) if the iteration budget runs out.
double op_norm(const SymMat& A, double tol = 1e-10, int max_iter = 20000);

/// (lambda_max, lambda_min): algebraically extreme eigenvalues, computed by
/// power iteration on A + cI and cI - A with c = inf-norm bound.
std::pair<double, double> extreme_eigs(const SymMat& A, double tol = 1e-10, int max_iter = 20000);

/// Unit eigenvector for the eigenvalue of largest algebraic value.
Vec top_eigenvector(const SymMat& A, double tol = 1e-9, int max_iter = 20000);

/// Cholesky factor L (lower-triangular, row-major n x n) of a symmetric
/// positive definite matrix. Returns false at the first non-positive pivot,
/// with `rank_out` = number of successful pivots.
bool cholesky(const SymMat& A, std::vector<double>& L_out, std::size_t& rank_out);

/// Solve L y = b then L^T x = y for the Cholesky factor above.
Vec cholesky_solve(const std::vector<double>& L, std::size_t n, std::span<const double> b);

/// Euclidean distance from y to span(basis) via modified Gram-Schmidt,
/// relative to ||y||. Rank-deficient inputs are fine (tiny directions dropped).
double span_residual(const std::vector<Vec>& basis, std::span<const double> y);

} // namespace covest
