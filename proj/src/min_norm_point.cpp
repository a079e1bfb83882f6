#include "covest/min_norm_point.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "covest/contracts.hpp"

namespace covest {

MinNormResult min_norm_point(const std::vector<Vec>& points, double tol, int max_iter) {
    require(!points.empty(), "min_norm_point: need at least one point");
    require(tol > 0.0, "min_norm_point: tol must be positive");
    const std::size_t m = points.size();
    const std::size_t n = points[0].size();
    for (const Vec& p : points) require(p.size() == n, "min_norm_point: ragged input");

    MinNormResult res;
    res.lambda.assign(m, 0.0);

    // Start from the shortest input point.
    std::size_t start = 0;
    double best_norm = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
        const double nn = dot(points[i], points[i]);
        if (nn < best_norm) {
            best_norm = nn;
            start = i;
        }
    }
    res.lambda[start] = 1.0;
    res.point = points[start];

    Vec d(n);
    std::vector<double> g(m);
    for (int it = 0; it < max_iter; ++it) {
        res.iterations = it;
        const double vv = dot(res.point, res.point);
        for (std::size_t i = 0; i < m; ++i) g[i] = dot(points[i], res.point);

        std::size_t fw = 0;
        double g_min = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i)
            if (g[i] < g_min) g_min = g[i], fw = i;

        std::size_t away = m;
        double g_max = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i)
            if (res.lambda[i] > 0.0 && g[i] > g_max) g_max = g[i], away = i;

        const double gap_fw = vv - g_min;
        res.gap = gap_fw;
        if (gap_fw <= tol) return res;

        const double gap_away = (away < m) ? g_max - vv : 0.0;
        double gamma_max = 1.0;
        bool is_away = false;
        if (gap_away > gap_fw && away < m && res.lambda[away] < 1.0) {
            is_away = true;
            gamma_max = res.lambda[away] / (1.0 - res.lambda[away]);
            for (std::size_t i = 0; i < n; ++i) d[i] = res.point[i] - points[away][i];
        } else {
            for (std::size_t i = 0; i < n; ++i) d[i] = points[fw][i] - res.point[i];
        }

        const double dd = dot(d, d);
        if (dd <= 0.0) return res; // direction degenerate; certificate already tight
        double gamma = -dot(res.point, d) / dd;
        gamma = std::clamp(gamma, 0.0, gamma_max);
        if (gamma == 0.0 && !is_away) return res;

        if (is_away) {
            const double f = 1.0 + gamma;
            for (double& l : res.lambda) l *= f;
            res.lambda[away] -= gamma;
            if (res.lambda[away] < 1e-15) res.lambda[away] = 0.0;
        } else {
            const double f = 1.0 - gamma;
            for (double& l : res.lambda) l *= f;
            res.lambda[fw] += gamma;
        }
        axpy(res.point, gamma, d);

        // Periodically resynchronize v with lambda to shed rounding drift.
        if ((it & 0x3F) == 0x3F) {
            res.point.assign(n, 0.0);
            for (std::size_t i = 0; i < m; ++i)
                if (res.lambda[i] != 0.0) axpy(res.point, res.lambda[i], points[i]);
        }
    }

    throw ConvergenceError("min_norm_point: duality gap did not reach tol", norm2(res.point),
                           res.gap);
}

} // namespace covest
