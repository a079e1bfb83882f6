#include "covest/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "covest/contracts.hpp"

namespace covest {

Rearrangement rearrange_desc(std::span<const double> a) {
    Rearrangement r;
    r.perm.resize(a.size());
    std::iota(r.perm.begin(), r.perm.end(), std::size_t{0});
    std::stable_sort(r.perm.begin(), r.perm.end(), [&](std::size_t i, std::size_t j) {
        return std::abs(a[i]) > std::abs(a[j]);
    });
    r.values.reserve(a.size());
    for (std::size_t idx : r.perm) r.values.push_back(std::abs(a[idx]));
    return r;
}

double lp_norm(std::span<const double> a, double p) {
    require(p >= 1.0, "lp_norm: p must be >= 1");
    double s = 0.0;
    for (double v : a) s += std::pow(std::abs(v), p);
    return std::pow(s, 1.0 / p);
}

double linf_norm(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

double weak_lp_norm(std::span<const double> a, double p) {
    require(p >= 1.0, "weak_lp_norm: p must be >= 1");
    const Rearrangement r = rearrange_desc(a);
    double m = 0.0;
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        m = std::max(m, r.values[i] * std::pow(static_cast<double>(i + 1), 1.0 / p));
    }
    return m;
}

OrderStatBound order_stat_bound(std::span<const double> lambda, std::span<const double> a, int K) {
    require(K >= 1, "order_stat_bound: K must be a positive integer");
    require(lambda.size() == a.size(), "order_stat_bound: length mismatch");
    const double slack = 1e-12;
    double l1 = 0.0, linf = 0.0;
    for (double v : lambda) {
        l1 += std::abs(v);
        linf = std::max(linf, std::abs(v));
    }
    require(l1 <= 1.0 + slack, "order_stat_bound: ||lambda||_1 must be <= 1");
    require(linf <= 1.0 / K + slack, "order_stat_bound: ||lambda||_inf must be <= 1/K");

    OrderStatBound out{0.0, 0.0};
    for (std::size_t i = 0; i < a.size(); ++i) out.lhs += lambda[i] * a[i];
    const Rearrangement r = rearrange_desc(a);
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(K), r.values.size());
    double top = 0.0;
    for (std::size_t i = 0; i < k; ++i) top += r.values[i];
    out.rhs = top / K;
    return out;
}

} // namespace covest
