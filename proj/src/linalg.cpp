#include "covest/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "covest/contracts.hpp"
#include "covest/rng.hpp"

namespace covest {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void scale(Vec& a, double s) {
    for (double& v : a) v *= s;
}

void axpy(Vec& y, double a, std::span<const double> x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

SymMat SymMat::identity(std::size_t n) {
    SymMat m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

SymMat SymMat::diagonal(std::span<const double> d) {
    SymMat m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

void SymMat::apply(std::span<const double> x, Vec& y) const {
    y.assign(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        const double* row = a_.data() + i * n_;
        double s = 0.0;
        for (std::size_t j = 0; j < n_; ++j) s += row[j] * x[j];
        y[i] = s;
    }
}

void SymMat::add_outer(std::span<const double> x, double w) {
    // Each product is computed once and mirrored, so the matrix stays
    // symmetric bit-for-bit no matter how many updates accumulate.
    for (std::size_t i = 0; i < n_; ++i) {
        const double wxi = w * x[i];
        double* row = a_.data() + i * n_;
        row[i] += wxi * x[i];
        for (std::size_t j = i + 1; j < n_; ++j) {
            const double v = wxi * x[j];
            row[j] += v;
            a_[j * n_ + i] += v;
        }
    }
}

double SymMat::inf_norm_bound() const {
    double best = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n_; ++j) s += std::abs(a_[i * n_ + j]);
        best = std::max(best, s);
    }
    return best;
}

double SymMat::symmetry_defect() const {
    double scale = 0.0;
    for (double v : a_) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return 0.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i + 1; j < n_; ++j)
            worst = std::max(worst, std::abs(a_[i * n_ + j] - a_[j * n_ + i]));
    return worst / scale;
}

SymMat& SymMat::operator-=(const SymMat& other) {
    require(n_ == other.n_, "SymMat: shape mismatch");
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= other.a_[i];
    return *this;
}

SymMat& SymMat::operator+=(const SymMat& other) {
    require(n_ == other.n_, "SymMat: shape mismatch");
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += other.a_[i];
    return *this;
}

SymMat operator-(SymMat a, const SymMat& b) {
    a -= b;
    return a;
}

namespace {

void check_symmetric(const SymMat& A) {
    require(A.dim() >= 1, "op_norm: empty matrix");
    require(A.symmetry_defect() <= 1e-12, "op_norm: input is not symmetric to 1e-12 relative");
}

struct PowerResult {
    double eigenvalue = 0.0; // Rayleigh quotient at exit
    double residual = std::numeric_limits<double>::infinity();
    Vec vector;
    bool converged = false;
};

// Power iteration on (A + shift*I). The stopping rule is the residual
// ||(A+sI)x - theta x|| <= tol_abs, which certifies an eigenvalue of A + sI
// within tol_abs of theta. With stagnation_exit, bails out early when the
// residual stops shrinking (the +/-lambda oscillation on the unshifted
// matrix); the shifted runs instead use their whole budget, since slow
// geometric progress is normal when the shift compresses the gap.
PowerResult power_iterate(const SymMat& A, double shift, double tol_abs, int max_iter, Rng rng,
                          bool stagnation_exit) {
    const std::size_t n = A.dim();
    PowerResult out;
    Vec x(n), y(n), r(n);
    for (double& v : x) v = rng.normal();
    double nx = norm2(x);
    if (nx == 0.0) x[0] = 1.0, nx = 1.0;
    scale(x, 1.0 / nx);

    double checkpoint = std::numeric_limits<double>::infinity();
    int since_checkpoint = 0;

    // Aitken extrapolation bookkeeping. For the shifted (positive
    // semidefinite) matrices the Rayleigh quotient increases monotonically at
    // a geometric rate, so three checkpoints give a sound error estimate even
    // when the spectral gap is tiny (clustered edges).
    constexpr int AITKEN_STRIDE = 40;
    double t1 = 0.0, t2 = 0.0;
    int aitken_count = 0;

    for (int it = 0; it < max_iter; ++it) {
        A.apply(x, y);
        if (shift != 0.0) axpy(y, shift, x);
        const double theta = dot(x, y);
        for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - theta * x[i];
        const double res = norm2(r);
        out.eigenvalue = theta;
        out.residual = res;
        if (res <= tol_abs && it >= 2) {
            out.converged = true;
            out.vector = x;
            return out;
        }
        if (shift != 0.0 && it > 0 && it % AITKEN_STRIDE == 0) {
            if (aitken_count >= 2) {
                const double d1 = t2 - t1;
                const double d2 = theta - t2;
                if (d1 > 0.0 && d2 >= 0.0 && d2 < d1) {
                    const double ratio = d2 / d1;
                    const double err = d2 * ratio / (1.0 - ratio);
                    if (err <= tol_abs) {
                        out.eigenvalue = theta + err;
                        out.residual = err;
                        out.converged = true;
                        out.vector = x;
                        return out;
                    }
                }
            }
            t1 = t2;
            t2 = theta;
            ++aitken_count;
        }
        if (stagnation_exit && ++since_checkpoint >= 80) {
            if (res > 0.5 * checkpoint) {
                out.vector = x;
                return out; // oscillating; caller switches to the shifted form
            }
            checkpoint = res;
            since_checkpoint = 0;
        }
        const double ny = norm2(y);
        if (ny == 0.0) {
            // x is (numerically) in the kernel of A + shift*I.
            out.eigenvalue = 0.0;
            out.residual = 0.0;
            out.converged = true;
            out.vector = x;
            return out;
        }
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / ny;
    }
    out.vector = x;
    return out;
}

// Both spectral ends via shifted power iteration. A coarse pass estimates the
// spectrum's midpoint, so the refined passes can use shifts just large enough
// to make the wanted end dominate in absolute value; the conservative shift
// (the inf-norm bound) multiplies the effective gap by up to bound/||A|| and
// is kept only as the fallback when a refined run fails to converge.
struct ExtremePairResult {
    PowerResult hi, lo;
    double lambda_max = 0.0, lambda_min = 0.0;
};

ExtremePairResult shifted_extremes(const SymMat& A, double bound, double tol, int max_iter,
                                   Rng rng) {
    const std::size_t n = A.dim();
    SymMat M(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) M(i, j) = -A(i, j);

    const int coarse_budget = std::min(600, std::max(50, max_iter / 8));
    PowerResult ch = power_iterate(A, bound, 0.02 * bound, coarse_budget, rng.substream(11), false);
    PowerResult cl = power_iterate(M, bound, 0.02 * bound, coarse_budget, rng.substream(12), false);
    const double mid = 0.5 * ((ch.eigenvalue - bound) + (bound - cl.eigenvalue));

    const double s_hi = -mid + 0.1 * bound;
    PowerResult hi = power_iterate(A, s_hi, tol * bound, max_iter, rng.substream(1), false);
    double lambda_max = hi.eigenvalue - s_hi;
    if (!hi.converged) {
        hi = power_iterate(A, bound, tol * bound, max_iter, rng.substream(3), false);
        lambda_max = hi.eigenvalue - bound;
    }

    const double s_lo = mid + 0.1 * bound;
    PowerResult lo = power_iterate(M, s_lo, tol * bound, max_iter, rng.substream(2), false);
    double lambda_min = -(lo.eigenvalue - s_lo);
    if (!lo.converged) {
        lo = power_iterate(M, bound, tol * bound, max_iter, rng.substream(4), false);
        lambda_min = bound - lo.eigenvalue;
    }

    ExtremePairResult out;
    out.hi = std::move(hi);
    out.lo = std::move(lo);
    out.lambda_max = lambda_max;
    out.lambda_min = lambda_min;
    return out;
}

} // namespace

double op_norm(const SymMat& A, double tol, int max_iter) {
    check_symmetric(A);
    require(tol > 0.0, "op_norm: tol must be positive");
    const std::size_t n = A.dim();
    if (n == 1) return std::abs(A(0, 0));
    const double bound = A.inf_norm_bound();
    if (bound == 0.0) return 0.0;

    Rng rng(seed_combine(0x6f70u /* "op" */, n));

    // Phase 1: plain power iteration on A. Resolves when one eigenvalue
    // dominates in absolute value.
    PowerResult plain = power_iterate(A, 0.0, tol * bound * 1e-3, max_iter / 4, rng, true);
    double best = std::abs(plain.eigenvalue);
    if (plain.converged && plain.residual <= tol * std::max(best, bound * 1e-12)) return best;

    // Phase 2: shift-and-restart on matrices whose dominant eigenvalues are
    // the algebraic extremes of A, where the +/-lambda ambiguity disappears.
    const ExtremePairResult ext = shifted_extremes(A, bound, tol, max_iter, rng.substream(9));
    best = std::max({best, std::abs(ext.lambda_max), std::abs(ext.lambda_min)});
    if (!ext.hi.converged || !ext.lo.converged) {
        throw ConvergenceError("op_norm: power iteration did not converge", best,
                               std::max(ext.hi.residual, ext.lo.residual));
    }
    return best;
}

std::pair<double, double> extreme_eigs(const SymMat& A, double tol, int max_iter) {
    check_symmetric(A);
    const std::size_t n = A.dim();
    if (n == 1) return {A(0, 0), A(0, 0)};
    const double bound = A.inf_norm_bound();
    if (bound == 0.0) return {0.0, 0.0};

    Rng rng(seed_combine(0x6565u /* "ee" */, n));
    const ExtremePairResult ext = shifted_extremes(A, bound, tol, max_iter, rng);
    if (!ext.hi.converged || !ext.lo.converged) {
        throw ConvergenceError("extreme_eigs: power iteration did not converge", ext.lambda_max,
                               std::max(ext.hi.residual, ext.lo.residual));
    }
    return {ext.lambda_max, ext.lambda_min};
}

Vec top_eigenvector(const SymMat& A, double tol, int max_iter) {
    check_symmetric(A);
    const std::size_t n = A.dim();
    if (n == 1) return Vec{1.0};
    const double bound = A.inf_norm_bound();
    Rng rng(seed_combine(0x7476u /* "tv" */, n));
    if (bound == 0.0) {
        Vec e(n, 0.0);
        e[0] = 1.0;
        return e;
    }
    const ExtremePairResult ext = shifted_extremes(A, bound, tol, max_iter, rng);
    return ext.hi.vector;
}

bool cholesky(const SymMat& A, std::vector<double>& L_out, std::size_t& rank_out) {
    const std::size_t n = A.dim();
    L_out.assign(n * n, 0.0);
    rank_out = 0;
    for (std::size_t j = 0; j < n; ++j) {
        double d = A(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= L_out[j * n + k] * L_out[j * n + k];
        if (!(d > 0.0)) return false;
        const double lj = std::sqrt(d);
        L_out[j * n + j] = lj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = A(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= L_out[i * n + k] * L_out[j * n + k];
            L_out[i * n + j] = s / lj;
        }
        ++rank_out;
    }
    return true;
}

Vec cholesky_solve(const std::vector<double>& L, std::size_t n, std::span<const double> b) {
    Vec y(n), x(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= L[i * n + k] * y[k];
        y[i] = s / L[i * n + i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= L[k * n + ii] * x[k];
        x[ii] = s / L[ii * n + ii];
    }
    return x;
}

double span_residual(const std::vector<Vec>& basis, std::span<const double> y) {
    const double ny = norm2(y);
    if (ny == 0.0) return 0.0;
    std::vector<Vec> q;
    q.reserve(basis.size());
    for (const Vec& b : basis) {
        Vec v = b;
        for (const Vec& u : q) axpy(v, -dot(u, v), u);
        // second pass for numerical hygiene
        for (const Vec& u : q) axpy(v, -dot(u, v), u);
        const double nv = norm2(v);
        if (nv > 1e-13 * std::max(1.0, norm2(b))) {
            scale(v, 1.0 / nv);
            q.push_back(std::move(v));
        }
    }
    Vec r(y.begin(), y.end());
    for (const Vec& u : q) axpy(r, -dot(u, r), u);
    for (const Vec& u : q) axpy(r, -dot(u, r), u);
    return norm2(r) / ny;
}

} // namespace covest
