#include "covest/epsnet.hpp"

#include <cmath>

#include "covest/contracts.hpp"
#include "covest/rng.hpp"

namespace covest {

namespace {

Vec random_unit(Rng& rng, std::size_t n) {
    Vec x(n);
    double nx = 0.0;
    do {
        for (double& v : x) v = rng.normal();
        nx = norm2(x);
    } while (nx == 0.0);
    scale(x, 1.0 / nx);
    return x;
}

double dist2(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

} // namespace

EpsNet epsilon_net(std::size_t n, double eps, std::uint64_t seed, std::size_t max_points,
                   EpsNetOptions opts) {
    require(n >= 1, "epsilon_net: dimension must be >= 1");
    require(eps > 0.0 && eps < 1.0, "epsilon_net: eps must be in (0,1)");
    require(max_points >= 1, "epsilon_net: max_points must be >= 1");

    EpsNet net;
    net.eps = eps;
    net.ambient_dim = n;
    Rng rng = Rng::from_parts(seed, seed_of_string("epsilon_net"));

    const double eps2 = eps * eps;
    std::uint64_t streak = 0;
    std::uint64_t candidates = 0;
    while (net.points.size() < std::min(max_points, opts.max_points)) {
        const std::uint64_t target =
            opts.rejection_streak ? opts.rejection_streak
                                  : 50 * std::max<std::uint64_t>(net.points.size(), 1);
        if (streak >= target) break;
        if (candidates >= opts.max_candidates) {
            net.incomplete = true;
            break;
        }
        ++candidates;
        Vec c = random_unit(rng, n);
        bool ok = true;
        for (const Vec& p : net.points) {
            if (dist2(c, p) <= eps2) {
                ok = false;
                break;
            }
        }
        if (ok) {
            net.points.push_back(std::move(c));
            streak = 0;
        } else {
            ++streak;
        }
    }
    net.final_rejection_streak = streak;
    return net;
}

bool verify_cover(EpsNet& net, double grid_step) {
    require(grid_step > 0.0, "verify_cover: grid_step must be positive");
    const std::size_t n = net.ambient_dim;
    require(n >= 1 && n <= 3, "verify_cover: grid check is only supported for n <= 3");
    const double eps2 = net.eps * net.eps;

    auto covered = [&](const Vec& x) {
        for (const Vec& p : net.points)
            if (dist2(x, p) <= eps2) return true;
        return false;
    };

    const double two_pi = 6.283185307179586476925286766559;
    bool ok = true;
    if (n == 1) {
        ok = covered(Vec{1.0}) && covered(Vec{-1.0});
    } else if (n == 2) {
        for (double t = 0.0; t < two_pi && ok; t += grid_step)
            ok = covered(Vec{std::cos(t), std::sin(t)});
    } else {
        for (double u = 0.0; u <= 3.14159265358979323846 && ok; u += grid_step) {
            const double su = std::sin(u), cu = std::cos(u);
            for (double t = 0.0; t < two_pi && ok; t += grid_step)
                ok = covered(Vec{su * std::cos(t), su * std::sin(t), cu});
        }
    }
    net.coverage_verified = ok;
    return ok;
}

NetNormEstimate net_norm_estimate(const SymMat& A, const EpsNet& net) {
    require(net.eps < 0.5, "net_norm_estimate: requires eps < 1/2");
    require(net.ambient_dim == A.dim(), "net_norm_estimate: dimension mismatch");
    require(!net.points.empty(), "net_norm_estimate: empty net");

    NetNormEstimate out;
    Vec y;
    for (const Vec& x : net.points) {
        A.apply(x, y);
        out.lower = std::max(out.lower, std::abs(dot(x, y)));
    }
    out.certified_upper = out.lower / (1.0 - 2.0 * net.eps);
    out.upper_is_heuristic = !net.coverage_verified;
    return out;
}

} // namespace covest
