#pragma once

#include <vector>

#include "covest/linalg.hpp"
#include "covest/sequences.hpp"

namespace covest {

struct MinNormResult {
    Vec point;        // v = sum_i lambda_i u_i
    CoeffSeq lambda;  // simplex weights, one per input point
    double gap = 0.0; // ||v||^2 - min_i <u_i, v> at exit
    int iterations = 0;
};

/// Minimum-norm point in conv(points) by Frank-Wolfe descent with away steps
/// and exact line search. Stops when the duality gap
///   ||v||^2 - min_i <u_i, v>  <=  tol,
/// which is exactly the first-order certificate <u_i, v> >= ||v||^2 - tol
/// for every i. Throws ConvergenceError (carrying the best iterate's gap)
/// if max_iter is reached first.
MinNormResult min_norm_point(const std::vector<Vec>& points, double tol, int max_iter = 200000);

} // namespace covest
