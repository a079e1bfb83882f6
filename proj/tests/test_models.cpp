#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "covest/contracts.hpp"
#include "covest/covariance.hpp"
#include "covest/models.hpp"
#include "covest/rng.hpp"

using namespace covest;

TEST_CASE("sampling is reproducible bit-exactly") {
    const VectorModel m = VectorModel::gaussian(2);
    const auto a = sample(m, 3, 1);
    const auto b = sample(m, 3, 1);
    REQUIRE(a.size() == 3);
    CHECK(a == b);
    const auto c = sample(m, 3, 2);
    CHECK(a != c);
    for (const Vec& x : a)
        for (double v : x) CHECK(std::isfinite(v));
}

TEST_CASE("scaled basis model: samples have norm sqrt(n) exactly") {
    const VectorModel m = VectorModel::scaled_basis(6);
    for (const Vec& x : sample(m, 64, 5)) {
        int nonzero = 0;
        for (double v : x) nonzero += (v != 0.0);
        CHECK(nonzero == 1);
        CHECK(norm2(x) == doctest::Approx(std::sqrt(6.0)).epsilon(1e-15));
    }
}

TEST_CASE("cube coordinates have unit variance") {
    const VectorModel m = VectorModel::cube(4);
    const auto xs = sample(m, 100000, 9);
    for (std::size_t j = 0; j < 4; ++j) {
        double s2 = 0.0;
        for (const Vec& x : xs) s2 += x[j] * x[j];
        CHECK(s2 / xs.size() == doctest::Approx(1.0).epsilon(0.02));
    }
}

TEST_CASE("cross polytope and simplex are isotropic after calibration") {
    for (auto kind : {ModelKind::cross_polytope, ModelKind::simplex}) {
        const VectorModel m = kind == ModelKind::cross_polytope
                                  ? VectorModel::cross_polytope(5, 200000)
                                  : VectorModel::simplex(5, 200000);
        const auto xs = sample(m, 60000, 31);
        const SymMat cov = sample_covariance(xs);
        CHECK(estimation_error(cov, SymMat::identity(5)) < 0.05);
        // mean zero
        Vec mean(5, 0.0);
        for (const Vec& x : xs) axpy(mean, 1.0 / xs.size(), x);
        CHECK(norm2(mean) < 0.02);
    }
}

TEST_CASE("gaussian empirical covariance near identity") {
    const VectorModel m = VectorModel::gaussian(16);
    const auto xs = sample(m, 100000, 4);
    CHECK(estimation_error(sample_covariance(xs), SymMat::identity(16)) < 0.05);
}

TEST_CASE("pareto product: unit variance, truncation bound exact") {
    const VectorModel m = VectorModel::pareto_product(8, 6.0, true, 3.0, 100000);
    const auto xs = sample(m, 40000, 13);
    double s2 = 0.0;
    const double bound = *m.K_declared * std::sqrt(8.0);
    for (const Vec& x : xs) {
        CHECK(norm2(x) <= bound * (1 + 1e-12));
        for (double v : x) s2 += v * v;
    }
    CHECK(s2 / (40000.0 * 8.0) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("pareto L_hat: stable below the tail exponent, unstable above") {
    // n = 1 sanity property: q < q_tail gives a doubling-stable certificate,
    // q >> q_tail visibly diverges with the sample count.
    const VectorModel m = VectorModel::pareto_product(1, 6.0);
    const auto lo = certify_moments(m, 4.0, 40000, 4, 21);
    const auto lo2 = certify_moments(m, 4.0, 160000, 4, 21);
    CHECK(std::abs(lo2.L_hat / lo.L_hat - 1.0) < 0.10);

    const auto hi = certify_moments(m, 24.0, 40000, 4, 21);
    const auto hi2 = certify_moments(m, 24.0, 160000, 4, 21);
    CHECK(hi2.L_hat / hi.L_hat > 1.05);
}

TEST_CASE("certify_moments on the scaled basis gives K_hat exactly 1") {
    const VectorModel m = VectorModel::scaled_basis(7);
    const auto cert = certify_moments(m, 4.0, 500, 8, 3);
    CHECK(cert.K_hat == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("gaussian fourth moment matches the closed form") {
    const VectorModel m = VectorModel::gaussian(6);
    const auto cert = certify_moments(m, 4.0, 200000, 12, 8);
    CHECK(cert.L_hat == doctest::Approx(std::pow(3.0, 0.25)).epsilon(0.05));
}

TEST_CASE("make_tight_frame") {
    SUBCASE("standard basis is already tight") {
        std::vector<Vec> basis{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
        Frame f = make_tight_frame(basis);
        CHECK(parseval_defect(f.points, 3) < 1e-10);
    }
    SUBCASE("two copies of an orthonormal basis") {
        std::vector<Vec> pts{{1, 0}, {0, 1}, {0, 1}, {1, 0}};
        Frame f = make_tight_frame(pts);
        CHECK(parseval_defect(f.points, 4) < 1e-10);
    }
    SUBCASE("random gaussian points whiten to a tight frame") {
        Rng rng(3);
        std::vector<Vec> pts(50, Vec(5));
        for (Vec& p : pts)
            for (double& v : p) v = rng.normal();
        Frame f = make_tight_frame(pts);
        CHECK(parseval_defect(f.points, 50) < 1e-10);
    }
    SUBCASE("rank-deficient input names the rank") {
        std::vector<Vec> pts{{1, 0, 0}, {2, 0, 0}, {0, 1, 0}, {0, 2, 0}};
        try {
            make_tight_frame(pts);
            FAIL("expected ContractError");
        } catch (const ContractError& e) {
            CHECK(std::string(e.what()).find("rank 2") != std::string::npos);
        }
    }
}

TEST_CASE("parseval defect of a deficient subset is at least 1") {
    // all points orthogonal to e1 -> the identity is off by a full eigenvalue
    std::vector<Vec> pts{{0, 1, 0}, {0, 0, 1}, {0, 1, 1}};
    CHECK(parseval_defect(pts, 3) >= 1.0 - 1e-12);
}

TEST_CASE("frame subsample keeps a small defect at N = 4 n log2 n") {
    auto build = [](std::size_t n) {
        const std::size_t M = 20 * n;
        Rng rng(77);
        std::vector<Vec> raw(M, Vec(n));
        for (Vec& p : raw)
            for (double& v : p) v = rng.normal();
        return VectorModel::discrete_frame(std::make_shared<Frame>(make_tight_frame(raw)));
    };

    SUBCASE("n = 32: median defect < 0.5 over 100 trials") {
        const std::size_t n = 32, N = 4 * n * 5; // log2(32) = 5
        const VectorModel model = build(n);
        std::vector<double> defects;
        for (int t = 0; t < 100; ++t)
            defects.push_back(parseval_defect(sample(model, N, 1000 + t), N));
        std::sort(defects.begin(), defects.end());
        CHECK(defects[defects.size() / 2] < 0.5);
    }

    SUBCASE("n = 64: defect < 0.5 in at least 90% of 200 trials") {
        const std::size_t n = 64, N = 4 * n * 6; // log2(64) = 6
        const VectorModel model = build(n);
        int good = 0;
        for (int t = 0; t < 200; ++t)
            good += parseval_defect(sample(model, N, 1000 + t), N) < 0.5;
        CHECK(good >= 180);
    }
}

TEST_CASE("model JSON round trip") {
    const VectorModel m = VectorModel::pareto_product(8, 6.0, true, 3.0, 50000);
    const VectorModel r = VectorModel::from_json(m.to_json());
    CHECK(r.kind == ModelKind::pareto_product);
    CHECK(r.n == 8);
    CHECK(r.q_tail == 6.0);
    CHECK(r.truncate);
    CHECK(sample(r, 5, 3) == sample(m, 5, 3));

    const VectorModel basis = VectorModel::scaled_basis(4);
    const VectorModel rb = VectorModel::from_json(basis.to_json());
    CHECK(sample(rb, 9, 1) == sample(basis, 9, 1));

    CHECK_THROWS_AS(VectorModel::from_json("{not json"), ContractError);
    CHECK_THROWS_AS(VectorModel::from_json(R"({"kind":"wat","n":3})"), ContractError);
}
