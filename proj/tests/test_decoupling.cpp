#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "covest/contracts.hpp"
#include "covest/decoupling.hpp"
#include "covest/rng.hpp"
#include "support/test_util.hpp"

using namespace covest;
using namespace covest::testing;

TEST_CASE("separation witness: orthogonal pair has none") {
    std::vector<Vec> X{{1, 0}, {0, 1}};
    const double a[] = {1.0, 1.0};
    CHECK_THROWS_AS(separation_witness(X, a, 1e-8), NoWitnessError);
}

TEST_CASE("separation witness: repeated direction") {
    std::vector<Vec> X{{1, 0, 0}, {1, 0, 0}, {1, 0, 0}};
    const double a[] = {1.0, 1.0, 1.0};
    const auto w = separation_witness(X, a, 1e-9);
    CHECK(norm2(w.x_bar) == doctest::Approx(1.0).epsilon(1e-10));
    for (const Vec& xi : X)
        CHECK(dot(xi, w.x_bar) >= 1.0 - 1e-8);
}

TEST_CASE("separation witness: construct-then-recover") {
    Rng rng(31);
    const std::size_t n = 12, m = 40;
    const Vec x = random_unit(n, 5);
    std::vector<Vec> X(m, Vec(n));
    CoeffSeq a(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (double& v : X[i]) v = rng.normal();
        a[i] = dot(X[i], x);
        if (std::abs(a[i]) < 1e-3) {
            X[i][0] += 1.0;
            a[i] = dot(X[i], x);
        }
    }
    const auto w = separation_witness(X, a, 1e-7);
    for (std::size_t i = 0; i < m; ++i)
        CHECK(dot(X[i], w.x_bar) / a[i] >= 1.0 - 1e-6);
    double mass = 0.0;
    for (double l : w.lambda) {
        CHECK(l >= 0.0);
        mass += l;
    }
    CHECK(mass <= 1.0 + 1e-6);
}

TEST_CASE("maurey: one-hot lambda always draws the same atom") {
    std::vector<Vec> X{{2, 0}, {0, 2}};
    CoeffSeq lambda{1.0, 0.0};
    CoeffSeq a{2.0, 2.0};
    Vec residual{0.25, 0.0};
    const auto sel = maurey_select(X, lambda, a, {0, 1}, 7, residual, 99);
    for (long d : sel.drawn) CHECK(d == 0);
    CHECK(sel.y_bar[0] == doctest::Approx(1.0 + 0.25));
    CHECK(sel.y_bar[1] == doctest::Approx(0.0));
}

TEST_CASE("maurey: zero lambda returns the residual") {
    std::vector<Vec> X{{1, 0}};
    CoeffSeq lambda{0.0};
    CoeffSeq a{1.0};
    Vec residual{0.5, -0.5};
    const auto sel = maurey_select(X, lambda, a, {0}, 3, residual, 4);
    for (long d : sel.drawn) CHECK(d == -1);
    CHECK(sel.y_bar == residual);
}

TEST_CASE("maurey mean: E[ybar] = sum lambda_i X_i / a_i") {
    const std::size_t n = 4;
    std::vector<Vec> X{{1, 0, 0, 0}, {0, 2, 0, 0}, {0, 0, 3, 0}, {1, 1, 1, 1}};
    CoeffSeq a{1.0, 1.0, 1.5, 2.0};
    CoeffSeq lambda{0.3, 0.25, 0.2, 0.15}; // mass 0.9, rest on the zero atom
    std::vector<std::size_t> I1p{0, 1, 2, 3};
    Vec residual(n, 0.0);

    Vec expect(n, 0.0);
    for (std::size_t i = 0; i < 4; ++i) axpy(expect, lambda[i] / a[i], X[i]);

    const int reruns = 10000, draws = 8;
    Vec mean(n, 0.0);
    std::vector<Vec> all;
    for (int r = 0; r < reruns; ++r) {
        const auto sel = maurey_select(X, lambda, a, I1p, draws, residual, 1000 + r);
        axpy(mean, 1.0 / reruns, sel.y_bar);
        all.push_back(sel.y_bar);
    }
    // 3-sigma check coordinatewise; Var(coord) <= max||X/a||^2 / draws
    double mx = 0.0;
    for (std::size_t i = 0; i < 4; ++i) mx = std::max(mx, norm2(X[i]) / a[i]);
    const double sigma = mx / std::sqrt(static_cast<double>(draws)) / std::sqrt(reruns);
    for (std::size_t d = 0; d < n; ++d)
        CHECK(std::abs(mean[d] - expect[d]) <= 3.5 * sigma);
}

TEST_CASE("maurey variance scales like 1/draws") {
    std::vector<Vec> X{{1, 0}, {0, 1}, {1, 1}, {-1, 1}};
    CoeffSeq a{1.0, 1.0, 1.0, 1.0};
    CoeffSeq lambda{0.4, 0.3, 0.2, 0.1};
    std::vector<std::size_t> I1p{0, 1, 2, 3};
    Vec residual(2, 0.0);
    const Vec w = random_unit(2, 8);

    std::vector<double> log_draws, log_var;
    for (int draws : {4, 16, 64, 256}) {
        const int reruns = 10000;
        double s = 0.0, s2 = 0.0;
        for (int r = 0; r < reruns; ++r) {
            const auto sel =
                maurey_select(X, lambda, a, I1p, draws, residual, 555000 + r);
            const double z = dot(w, sel.y_bar);
            s += z;
            s2 += z * z;
        }
        const double var = s2 / reruns - (s / reruns) * (s / reruns);
        log_draws.push_back(std::log2(static_cast<double>(draws)));
        log_var.push_back(std::log2(var));
    }
    // least-squares slope over the four points
    double mx = 0, my = 0;
    for (int i = 0; i < 4; ++i) mx += log_draws[i], my += log_var[i];
    mx /= 4, my /= 4;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < 4; ++i) {
        sxx += (log_draws[i] - mx) * (log_draws[i] - mx);
        sxy += (log_draws[i] - mx) * (log_var[i] - my);
    }
    CHECK(sxy / sxx == doctest::Approx(-1.0).epsilon(0.1));
}

TEST_CASE("maurey collision frequency matches lambda") {
    std::vector<Vec> X{{1, 0}, {0, 1}};
    CoeffSeq a{1.0, 1.0};
    CoeffSeq lambda{0.35, 0.0};
    std::vector<std::size_t> I1p{0, 1};
    Vec residual(2, 0.0);
    int hits = 0;
    const int reruns = 20000;
    for (int r = 0; r < reruns; ++r) {
        const auto sel = maurey_select(X, lambda, a, I1p, 1, residual, 77000 + r);
        hits += (sel.drawn[0] == 0);
    }
    const double p = static_cast<double>(hits) / reruns;
    CHECK(p == doctest::Approx(0.35).epsilon(0.05));
}

TEST_CASE("decouple: orthogonal instance fails the largeness precondition") {
    const std::size_t n = 16;
    std::vector<Vec> X;
    for (std::size_t i = 0; i < n; ++i) {
        Vec e(n, 0.0);
        e[i] = std::sqrt(static_cast<double>(n));
        X.push_back(e);
    }
    Vec x(n, 1.0 / std::sqrt(static_cast<double>(n)));
    DecouplingParams params;
    const auto res = decouple(X, x, params, 3);
    CHECK(res.status == DecoupleStatus::precondition_largeness);
    CHECK_FALSE(res.certificate.has_value());
}

TEST_CASE("decouple: too few vectors") {
    std::vector<Vec> X{{1.0, 0.0}, {0.0, 1.0}};
    const auto res = decouple(X, Vec{1.0, 0.0}, DecouplingParams{}, 1);
    CHECK(res.status == DecoupleStatus::precondition_largeness);
}

TEST_CASE("decouple succeeds on the near-duplicate family and self-audits") {
    const auto inst = make_near_duplicate_instance(32, 256, 12345);
    DecouplingParams params;
    const auto res = decouple(inst.X, inst.x, params, 999);
    REQUIRE(res.ok());
    const auto& cert = *res.certificate;
    CHECK(!cert.I.empty());
    CHECK(!cert.J.empty());
    CHECK(cert.J.size() <= params.delta * cert.I.size());

    const auto audit = check_decoupling(cert, inst.X, params);
    CHECK(audit.all_pass);

    SUBCASE("tampered y fails span or threshold") {
        auto bad = cert;
        bad.y = random_unit(32, 777);
        const auto rep = check_decoupling(bad, inst.X, params);
        CHECK_FALSE(rep.all_pass);
    }
    SUBCASE("index moved from J into I is flagged") {
        auto bad = cert;
        bad.I.push_back(bad.J.front());
        const auto rep = check_decoupling(bad, inst.X, params);
        CHECK_FALSE(rep.all_pass);
    }
}

TEST_CASE("near-duplicate family: high success rate across seeds") {
    DecouplingParams params;
    int ok = 0;
    const int instances = 20;
    for (int t = 0; t < instances; ++t) {
        const auto inst = make_near_duplicate_instance(32, 256, 5000 + t);
        const auto res = decouple(inst.X, inst.x, params, seed_combine(42, t));
        ok += res.ok();
    }
    CHECK(ok >= instances * 8 / 10);
}

TEST_CASE("params JSON round trip") {
    DecouplingParams p;
    p.delta = 0.4;
    p.alpha = 0.7;
    p.max_retries = 3;
    const auto q = DecouplingParams::from_json(p.to_json());
    CHECK(q.delta == 0.4);
    CHECK(q.alpha == 0.7);
    CHECK(q.max_retries == 3);
    CHECK_THROWS_AS(DecouplingParams::from_json("nope"), ContractError);
}
