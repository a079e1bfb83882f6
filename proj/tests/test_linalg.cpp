#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "covest/contracts.hpp"
#include "covest/linalg.hpp"
#include "support/dense_eig_oracle.hpp"
#include "support/test_util.hpp"

using namespace covest;
using namespace covest::testing;

TEST_CASE("jacobi oracle on analytic spectra") {
    // The oracle itself is validated on cases whose eigenvalues are known in
    // closed form before it is trusted to check anything else.
    const double d[] = {3.0, -5.0, 0.25, 1.0};
    auto eig = jacobi_eigenvalues(SymMat::diagonal(d));
    std::sort(eig.begin(), eig.end());
    CHECK(eig[0] == doctest::Approx(-5.0));
    CHECK(eig[3] == doctest::Approx(3.0));

    // 2x2 with hand-computed spectrum: [[2,1],[1,2]] -> {1, 3}
    SymMat B(2);
    B(0, 0) = 2;
    B(0, 1) = 1;
    B(1, 0) = 1;
    B(1, 1) = 2;
    auto eb = jacobi_eigenvalues(B);
    std::sort(eb.begin(), eb.end());
    CHECK(eb[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eb[1] == doctest::Approx(3.0).epsilon(1e-12));

    // Conjugating a diagonal by a rotation leaves the spectrum alone.
    SymMat C(3);
    const double c = std::cos(0.7), s = std::sin(0.7);
    const double diag[3] = {2.0, -1.0, 0.5};
    double Q[3][3] = {{c, -s, 0}, {s, c, 0}, {0, 0, 1}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double v = 0;
            for (int k = 0; k < 3; ++k) v += Q[i][k] * diag[k] * Q[j][k];
            C(i, j) = v;
        }
    auto ec = jacobi_eigenvalues(C);
    std::sort(ec.begin(), ec.end());
    CHECK(ec[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(ec[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(ec[2] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("op_norm trivial cases") {
    CHECK(op_norm(SymMat::identity(5)) == doctest::Approx(1.0));
    const double d[] = {3.0, -5.0};
    CHECK(op_norm(SymMat::diagonal(d)) == doctest::Approx(5.0));
    CHECK(op_norm(SymMat(4)) == 0.0);
    const double one[] = {-7.5};
    CHECK(op_norm(SymMat::diagonal(one)) == doctest::Approx(7.5));
}

TEST_CASE("op_norm matches dense oracle on a random matrix (seed 7)") {
    const SymMat A = random_symmetric(10, 7);
    CHECK(op_norm(A, 1e-10) == doctest::Approx(oracle_op_norm(A)).epsilon(1e-8));
}

TEST_CASE("op_norm rejects asymmetric input") {
    SymMat A(2);
    A(0, 1) = 1.0;
    A(1, 0) = 0.5;
    CHECK_THROWS_AS(op_norm(A), ContractError);
}

TEST_CASE("op_norm resolves the +/- ambiguity") {
    const double d[] = {4.0, -4.0, 1.0};
    CHECK(op_norm(SymMat::diagonal(d)) == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("extreme_eigs") {
    const double d[] = {1.0, 2.0, 3.0};
    auto [hi, lo] = extreme_eigs(SymMat::diagonal(d));
    CHECK(hi == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(lo == doctest::Approx(1.0).epsilon(1e-9));

    SymMat negid = SymMat::identity(4);
    for (std::size_t i = 0; i < 4; ++i) negid(i, i) = -1.0;
    auto [h2, l2] = extreme_eigs(negid);
    CHECK(h2 == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(l2 == doctest::Approx(-1.0).epsilon(1e-9));

    const SymMat W = random_wishart(8, 12, 3);
    auto [h3, l3] = extreme_eigs(W, 1e-10);
    auto [oh, ol] = oracle_extreme_eigs(W);
    CHECK(h3 == doctest::Approx(oh).epsilon(1e-8));
    CHECK(l3 == doctest::Approx(ol).epsilon(1e-8));
}

TEST_CASE("fuzzed oracle agreement up to 50x50") {
    for (int c = 0; c < 40; ++c) {
        const std::size_t n = 2 + (c * 7) % 49;
        const SymMat A = random_symmetric(n, 1000 + c);
        const double ref = oracle_op_norm(A);
        CHECK(op_norm(A, 1e-10) == doctest::Approx(ref).epsilon(1e-8));
    }
}

TEST_CASE("top_eigenvector is an eigenvector of the top eigenvalue") {
    const SymMat A = random_symmetric(12, 42);
    const Vec v = top_eigenvector(A, 1e-11);
    Vec av;
    A.apply(v, av);
    const double lam = dot(v, av);
    auto [hi, lo] = oracle_extreme_eigs(A);
    CHECK(lam == doctest::Approx(hi).epsilon(1e-7));
    Vec r = av;
    axpy(r, -lam, v);
    CHECK(norm2(r) < 1e-6 * std::abs(hi));
    (void)lo;
}

TEST_CASE("cholesky solve round trip") {
    const SymMat W = random_wishart(6, 20, 5);
    std::vector<double> L;
    std::size_t rank = 0;
    REQUIRE(cholesky(W, L, rank));
    CHECK(rank == 6);
    const Vec b = random_unit(6, 9);
    const Vec x = cholesky_solve(L, 6, b);
    Vec wx;
    W.apply(x, wx);
    for (std::size_t i = 0; i < 6; ++i) CHECK(wx[i] == doctest::Approx(b[i]).epsilon(1e-9));
}

TEST_CASE("cholesky reports rank deficiency") {
    SymMat S(3);
    Vec v{1.0, 2.0, 3.0};
    S.add_outer(v, 1.0);
    std::vector<double> L;
    std::size_t rank = 0;
    CHECK_FALSE(cholesky(S, L, rank));
    CHECK(rank < 3);
}

TEST_CASE("span_residual") {
    std::vector<Vec> basis{{1, 0, 0}, {0, 1, 0}};
    CHECK(span_residual(basis, Vec{3, -2, 0}) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(span_residual(basis, Vec{0, 0, 2}) == doctest::Approx(1.0));
    // duplicate directions are fine
    std::vector<Vec> dup{{1, 1, 0}, {2, 2, 0}};
    CHECK(span_residual(dup, Vec{5, 5, 0}) < 1e-12);
}
