#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "covest/contracts.hpp"
#include "covest/min_norm_point.hpp"
#include "covest/rng.hpp"

using namespace covest;

namespace {

// Grid-search oracle over simplex weights for supports of size <= 3. Returns
// the best norm found; an upper bound on the true minimum that converges as
// the step shrinks.
double grid_oracle(const std::vector<Vec>& pts, double step) {
    const std::size_t m = pts.size();
    auto nrm = [&](const Vec& v) { return norm2(v); };
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) best = std::min(best, nrm(pts[i]));
    Vec tmp(pts[0].size());
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            for (double a = 0.0; a <= 1.0 + 1e-12; a += step) {
                for (std::size_t k = 0; k < tmp.size(); ++k)
                    tmp[k] = a * pts[i][k] + (1 - a) * pts[j][k];
                best = std::min(best, nrm(tmp));
            }
        }
    }
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            for (std::size_t k = j + 1; k < m; ++k)
                for (double a = 0.0; a <= 1.0 + 1e-12; a += step)
                    for (double b = 0.0; a + b <= 1.0 + 1e-12; b += step) {
                        const double c = 1.0 - a - b;
                        for (std::size_t d = 0; d < tmp.size(); ++d)
                            tmp[d] = a * pts[i][d] + b * pts[j][d] + c * pts[k][d];
                        best = std::min(best, nrm(tmp));
                    }
    return best;
}

} // namespace

TEST_CASE("two basis vectors") {
    std::vector<Vec> pts{{1, 0}, {0, 1}};
    auto r = min_norm_point(pts, 1e-10);
    CHECK(r.point[0] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(r.point[1] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(norm2(r.point) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-7));
    CHECK(r.lambda[0] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(r.lambda[1] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("single point") {
    std::vector<Vec> pts{{1, 0, 0}};
    auto r = min_norm_point(pts, 1e-12);
    CHECK(r.point == Vec{1, 0, 0});
    CHECK(r.lambda == CoeffSeq{1.0});
}

TEST_CASE("hull containing the origin") {
    std::vector<Vec> pts{{1, 0}, {-1, 0.1}, {0, -1}};
    auto r = min_norm_point(pts, 1e-10);
    CHECK(norm2(r.point) < 1e-4);
}

TEST_CASE("optimality certificate holds for every returned point") {
    Rng rng(2024);
    for (int t = 0; t < 25; ++t) {
        const std::size_t m = 2 + rng.below(20);
        const std::size_t n = 1 + rng.below(6);
        std::vector<Vec> pts(m, Vec(n));
        const double off = rng.uniform(0.0, 2.0);
        for (Vec& p : pts) {
            for (double& v : p) v = rng.normal();
            p[0] += off;
        }
        const double tol = 1e-8;
        auto r = min_norm_point(pts, tol);
        const double vv = dot(r.point, r.point);
        double wsum = 0.0;
        Vec recon(n, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            CHECK(dot(pts[i], r.point) >= vv - tol * (1 + vv));
            CHECK(r.lambda[i] >= 0.0);
            wsum += r.lambda[i];
            axpy(recon, r.lambda[i], pts[i]);
        }
        CHECK(wsum == doctest::Approx(1.0).epsilon(1e-9));
        for (std::size_t d = 0; d < n; ++d)
            CHECK(recon[d] == doctest::Approx(r.point[d]).epsilon(1e-7));
    }
}

TEST_CASE("matches the simplex grid oracle") {
    Rng rng(99);
    std::vector<Vec> pts(20, Vec(5));
    for (Vec& p : pts) {
        for (double& v : p) v = 0.5 * rng.normal();
        p[0] += 2.0; // keep the hull away from the origin, low-dim optimum
    }
    auto r = min_norm_point(pts, 1e-10);
    const double oracle = grid_oracle(pts, 0.005);
    CHECK(norm2(r.point) <= oracle + 1e-10);
    CHECK(norm2(r.point) == doctest::Approx(oracle).epsilon(1e-4));
}

TEST_CASE("iteration budget error carries the best iterate") {
    std::vector<Vec> pts;
    Rng rng(1);
    for (int i = 0; i < 30; ++i) {
        Vec p(8);
        for (double& v : p) v = rng.normal();
        p[0] += 3.0;
        pts.push_back(p);
    }
    CHECK_THROWS_AS(min_norm_point(pts, 1e-14, 3), ConvergenceError);
    try {
        min_norm_point(pts, 1e-14, 3);
    } catch (const ConvergenceError& e) {
        CHECK(e.best > 0.0);
        CHECK(e.gap > 0.0);
    }
}
