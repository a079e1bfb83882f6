#pragma once

#include <cstdint>
#include <vector>

#include "covest/linalg.hpp"

namespace covest {

/// Greedy maximal packing of the unit sphere S^{n-1}. All points are unit
/// vectors with pairwise distance > eps. A maximal packing is an eps-cover of
/// the region the sampler reached; the rejection streak at exit is the
/// coverage-confidence diagnostic.
struct EpsNet {
    double eps = 0.0;
    std::size_t ambient_dim = 0;
    std::vector<Vec> points;
    std::uint64_t final_rejection_streak = 0;
    bool incomplete = false;     // candidate budget ran out before the streak target
    bool coverage_verified = false; // set by verify_cover (grid check, n <= 3)
};

struct EpsNetOptions {
    std::size_t max_points = 100000;
    // Stop once this many consecutive candidates were rejected; 0 means the
    // default 50 * max(|net|, 1).
    std::uint64_t rejection_streak = 0;
    std::uint64_t max_candidates = 2000000;
};

EpsNet epsilon_net(std::size_t n, double eps, std::uint64_t seed, std::size_t max_points,
                   EpsNetOptions opts = {});

/// Exhaustive check that every grid point of S^{n-1} (resolution h on angles)
/// is within eps of the net. Only sensible for n <= 3.
bool verify_cover(EpsNet& net, double grid_step);

struct NetNormEstimate {
    double lower = 0.0;          // max over net of |<Ax, x>|; always <= ||A||
    double certified_upper = 0.0; // (1 - 2 eps)^{-1} * lower
    bool upper_is_heuristic = true; // true unless the net's coverage was verified
};

/// Norm bounds from a net: the lower bound needs no coverage assumption; the
/// upper one is certified only when the net is a genuine eps-cover.
/// Requires eps < 1/2.
NetNormEstimate net_norm_estimate(const SymMat& A, const EpsNet& net);

} // namespace covest
