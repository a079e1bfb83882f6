#pragma once

#include <cstdint>

#include "covest/linalg.hpp"
#include "covest/rng.hpp"

namespace covest::testing {

inline SymMat random_symmetric(std::size_t n, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    SymMat A(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            const double v = scale * rng.normal();
            A(i, j) = v;
            A(j, i) = v;
        }
    return A;
}

inline SymMat random_wishart(std::size_t n, std::size_t k, std::uint64_t seed) {
    Rng rng(seed);
    SymMat A(n);
    Vec col(n);
    for (std::size_t s = 0; s < k; ++s) {
        for (double& v : col) v = rng.normal();
        A.add_outer(col, 1.0 / static_cast<double>(k));
    }
    return A;
}

inline Vec random_unit(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Vec u(n);
    double nu = 0.0;
    do {
        for (double& v : u) v = rng.normal();
        nu = norm2(u);
    } while (nu == 0.0);
    scale(u, 1.0 / nu);
    return u;
}

} // namespace covest::testing
