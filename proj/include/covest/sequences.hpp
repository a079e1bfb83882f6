#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace covest {

/// Finite real coefficient sequence (a_i), (b_i), (lambda_i).
using CoeffSeq = std::vector<double>;

struct Rearrangement {
    CoeffSeq values;              // |a| sorted non-increasing
    std::vector<std::size_t> perm; // perm[k] = original index of values[k]
};

/// Non-increasing rearrangement of |a|; ties are broken by original index,
/// so the permutation is stable.
Rearrangement rearrange_desc(std::span<const double> a);

double lp_norm(std::span<const double> a, double p);
double linf_norm(std::span<const double> a);

/// Weak l_p norm: max_i |a|*_i * i^(1/p) over 1-based ranks i. For finite
/// sequences this max is the exact infimum in the definition.
double weak_lp_norm(std::span<const double> a, double p);

struct OrderStatBound {
    double lhs; // sum_i lambda_i a_i
    double rhs; // (1/K) * sum of the K largest |a|*_i
};

/// Order-statistics bound: requires ||lambda||_1 <= 1 and
/// ||lambda||_inf <= 1/K (1e-12 slack); guarantees lhs <= rhs.
OrderStatBound order_stat_bound(std::span<const double> lambda, std::span<const double> a, int K);

} // namespace covest
