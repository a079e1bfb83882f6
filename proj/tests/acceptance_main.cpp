// Acceptance suite: runs every acceptance criterion end to end and prints one
// PASS/FAIL line per criterion. Exit code is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "covest/contracts.hpp"
#include "covest/covariance.hpp"
#include "covest/decoupling.hpp"
#include "covest/experiments.hpp"
#include "covest/min_norm_point.hpp"
#include "covest/models.hpp"
#include "covest/rng.hpp"
#include "covest/sequences.hpp"
#include "covest/structure.hpp"
#include "support/dense_eig_oracle.hpp"
#include "support/structure_fuzz.hpp"
#include "support/test_util.hpp"

using namespace covest;
using namespace covest::testing;

namespace {

struct Criterion {
    int id;
    std::string name;
    bool pass;
    std::string detail;
    double seconds;
};

std::vector<Criterion> g_results;

template <typename F>
void run_criterion(int id, const std::string& name, F&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Criterion c{id, name, false, "", 0.0};
    try {
        c.pass = fn(c.detail);
    } catch (const std::exception& e) {
        c.pass = false;
        c.detail = std::string("exception: ") + e.what();
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s  [%2d] %-28s %s (%.1fs)\n", c.pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                c.detail.c_str(), c.seconds);
    std::fflush(stdout);
    g_results.push_back(std::move(c));
}

bool criterion_oracle_equivalence(std::string& detail) {
    Rng rng(0xACCE01);
    double worst = 0.0;
    for (int c = 0; c < 200; ++c) {
        const std::size_t n = 2 + rng.below(49); // up to 50x50
        SymMat A = (c % 3 == 0) ? random_wishart(n, n / 2 + 2, 50000 + c)
                                : random_symmetric(n, 50000 + c);
        const double ref = oracle_op_norm(A);
        const double got = op_norm(A, 1e-10);
        const double rel = std::abs(got - ref) / std::max(1e-300, ref);
        worst = std::max(worst, rel);

        const auto [hi, lo] = extreme_eigs(A, 1e-10);
        const auto [ohi, olo] = oracle_extreme_eigs(A);
        const double scale = std::max({std::abs(ohi), std::abs(olo), 1e-300});
        worst = std::max(worst, std::abs(hi - ohi) / scale);
        worst = std::max(worst, std::abs(lo - olo) / scale);
    }
    detail = "worst relative deviation " + std::to_string(worst);
    return worst <= 1e-8;
}

bool criterion_regularization_exhaustive(std::string& detail) {
    long checked = 0;
    for (int L = 1; L <= 14; ++L) {
        for (unsigned mask = 1; mask < (1u << L); ++mask) {
            std::vector<int> J;
            for (int j = 1; j <= L; ++j)
                if (mask & (1u << (j - 1))) J.push_back(j);
            for (double alpha : {0.1, 0.5, 0.9}) {
                const auto r = regularize(J, L, alpha);
                const int l = static_cast<int>(J.size());
                std::size_t count = 0;
                for (int j : J) count += (j >= r.j1 && j <= r.j2);
                const bool ok = 2 * r.j1 >= l && r.j1 <= r.j2 &&
                                static_cast<double>(r.j2) <= (1.0 + alpha) * r.j1 + 1e-9 &&
                                static_cast<double>(count) >= r.density_bound &&
                                std::binary_search(J.begin(), J.end(), r.j1) &&
                                std::binary_search(J.begin(), J.end(), r.j2);
                ++checked;
                if (!ok) {
                    detail = "violation at L=" + std::to_string(L) + " mask=" +
                             std::to_string(mask) + " alpha=" + std::to_string(alpha);
                    return false;
                }
            }
        }
    }
    detail = std::to_string(checked) + " (J, alpha) cases";
    return true;
}

bool criterion_structure_pipeline(std::string& detail) {
    Rng lam_rng(0xACCE03);
    int accepted = 0, strict = 0;
    std::uint64_t seed = 1;
    while (accepted < 500) {
        StructureInstance inst = make_structure_instance(seed++);
        StructureCertificate cert;
        try {
            cert = extract_structure(inst.b, inst.alpha, inst.K, inst.cfg);
        } catch (const ContractError&) {
            continue;
        }
        const CoeffSeq lambda = make_fuzz_lambda(cert, accepted, lam_rng);
        RefinedSet refined;
        try {
            refined = refine_structure(cert, lambda);
        } catch (const ContractError& e) {
            detail = "refine failed on case " + std::to_string(accepted) + ": " + e.what();
            return false;
        }
        const auto rep = check_structure(cert, &refined, inst.b, lambda, inst.alpha, inst.K);
        if (!rep.pass_with_relaxed_i2) {
            detail = "checker failed on case " + std::to_string(accepted) + ": " + rep.to_json();
            return false;
        }
        strict += rep.pass_strict;
        ++accepted;
    }
    detail = "500/500 relaxed-I2 pass; strict-I2 rate " + std::to_string(strict / 500.0);
    return true;
}

bool criterion_decoupling(std::string& detail) {
    DecouplingParams params; // max_retries = 10 by default
    int ok = 0;
    const int instances = 100;
    for (int t = 0; t < instances; ++t) {
        const auto inst = make_near_duplicate_instance(32, 256, 77000 + t);
        const auto res = decouple(inst.X, inst.x, params, seed_combine(0xACCE04, t));
        if (!res.ok()) continue;
        const auto audit = check_decoupling(*res.certificate, inst.X, params);
        if (!audit.all_pass) {
            detail = "emitted certificate failed its audit at instance " + std::to_string(t);
            return false;
        }
        ++ok;
    }
    detail = "success " + std::to_string(ok) + "/100 within " +
             std::to_string(params.max_retries) + " retries";
    return ok >= 80;
}

FitResult gaussian_fit, pareto_fit;

bool criterion_subgaussian_rate(std::string& detail) {
    ExperimentConfig cfg;
    cfg.experiment = ExperimentKind::scaling;
    cfg.n_grid = {16, 32, 64};
    cfg.N_over_n_grid = {16, 64, 256};
    cfg.trials = 50;
    cfg.master_seed = 0xACCE05;
    cfg.jobs = 2;
    const auto res = run_experiment(cfg);
    gaussian_fit = *res.fit;
    detail = "slope " + std::to_string(gaussian_fit.slope) + " (r2 " +
             std::to_string(gaussian_fit.r_squared) + ")";
    return std::abs(gaussian_fit.slope - 0.5) <= 0.1;
}

bool criterion_heavy_tail_rate(std::string& detail) {
    ExperimentConfig cfg;
    cfg.experiment = ExperimentKind::scaling;
    cfg.model_json = VectorModel::pareto_product(16, 6.0, true, 4.0, 200000).to_json();
    cfg.n_grid = {16, 32, 64};
    cfg.N_over_n_grid = {16, 64, 256};
    cfg.trials = 50;
    cfg.master_seed = 0xACCE06;
    cfg.jobs = 2;
    const auto res = run_experiment(cfg);
    pareto_fit = *res.fit;
    const double gap = gaussian_fit.slope - pareto_fit.slope;
    detail = "pareto slope " + std::to_string(pareto_fit.slope) + ", gaussian " +
             std::to_string(gaussian_fit.slope) + ", gap " + std::to_string(gap);
    return gap >= 0.05 && pareto_fit.slope >= 1.0 / 6.0 - 0.1;
}

bool criterion_baiyin_edges(std::string& detail) {
    const std::size_t n = 200, N = 2000;
    const VectorModel m = VectorModel::gaussian(n);
    int good = 0;
    const int seeds = 50;
    for (int t = 0; t < seeds; ++t) {
        const auto xs = sample(m, N, trial_seed(0xACCE07, "baiyin", n, N, t));
        const auto [hi, lo] = extreme_eigs(sample_covariance(xs), 1e-5);
        if (std::abs(hi - 1.7325) < 0.15 && std::abs(lo - 0.4675) < 0.15) ++good;
    }
    detail = std::to_string(good) + "/50 seeds inside both windows";
    return good >= 45;
}

bool criterion_coupon(std::string& detail) {
    ExperimentConfig cfg;
    cfg.experiment = ExperimentKind::coupon;
    cfg.n_grid = {64};
    const std::size_t n = 64;
    const std::size_t N2 = static_cast<std::size_t>(std::ceil(4.0 * n * std::log(n)));
    cfg.N_grid = {n, N2};
    cfg.trials = 200;
    cfg.master_seed = 0xACCE08;
    const auto res = run_experiment(cfg);
    double frac_n = -1, frac_N2 = -1;
    for (const auto& r : res.rows) {
        if (r.metric != "fraction_error_ge_1") continue;
        if (r.N == n) frac_n = r.value;
        if (r.N == N2) frac_N2 = r.value;
    }
    detail = "P(err>=1): " + std::to_string(frac_n) + " at N=n, " + std::to_string(frac_N2) +
             " at N=ceil(4 n ln n)";
    return frac_n >= 0.99 && frac_N2 <= 0.05;
}

bool criterion_frame_m_independence(std::string& detail) {
    const std::size_t n = 16, N = 256;
    ExperimentConfig cfg;
    cfg.experiment = ExperimentKind::frame;
    cfg.n_grid = {n};
    cfg.M_grid = {2 * n, 8 * n, 32 * n};
    cfg.N_grid = {N};
    cfg.trials = 100;
    cfg.master_seed = 0xACCE09;
    cfg.jobs = 2;
    const auto res = run_experiment(cfg);
    std::map<std::string, std::vector<double>> by_m;
    for (const auto& r : res.rows) by_m[r.metric].push_back(r.value);
    std::vector<double> med;
    for (auto& [k, v] : by_m) {
        std::sort(v.begin(), v.end());
        med.push_back(v[v.size() / 2]);
    }
    const double lo = *std::min_element(med.begin(), med.end());
    const double hi = *std::max_element(med.begin(), med.end());
    detail = "median defects in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
    return hi < 2.0 * lo;
}

bool criterion_exact_laws(std::string& detail) {
    // E_B monotonicity
    {
        const VectorModel m = VectorModel::gaussian(8);
        SampleSet s = draw_sample_set(m, 256, 0xE0);
        const Vec x = random_unit(8, 0xE1);
        auto prev = large_coeff_set(s, x, 0.05);
        for (double B = 0.08; B < 20.0; B *= 1.7) {
            const auto next = large_coeff_set(s, x, B);
            if (!std::includes(prev.begin(), prev.end(), next.begin(), next.end())) {
                detail = "E_B monotonicity failed";
                return false;
            }
            prev = next;
        }
    }
    // PSD of sample covariance (oracle eigenvalues)
    {
        Rng rng(0xE2);
        for (int t = 0; t < 50; ++t) {
            const std::size_t n = 2 + rng.below(16);
            const std::size_t N = 1 + rng.below(3 * n);
            const auto xs = sample(VectorModel::gaussian(n), N, 600 + t);
            for (double v : jacobi_eigenvalues(sample_covariance(xs)))
                if (v < -1e-10) {
                    detail = "PSD violation " + std::to_string(v);
                    return false;
                }
        }
    }
    // order statistics bound
    {
        Rng rng(0xE3);
        for (int t = 0; t < 1000; ++t) {
            const int K = 1 + static_cast<int>(rng.below(6));
            const std::size_t m = K + rng.below(24);
            CoeffSeq lam(m), a(m);
            for (double& v : a) v = 3.0 * rng.normal();
            double l1 = 0.0, linf = 0.0;
            for (double& v : lam) {
                v = rng.normal();
                l1 += std::abs(v);
                linf = std::max(linf, std::abs(v));
            }
            const double f = std::min(1.0 / std::max(l1, 1e-12),
                                      1.0 / (K * std::max(linf, 1e-12)));
            for (double& v : lam) v *= std::min(1.0, f) * rng.uniform();
            const auto r = order_stat_bound(lam, a, K);
            if (r.lhs > r.rhs + 1e-10) {
                detail = "order statistics bound violated";
                return false;
            }
        }
    }
    // weak lp <= lp
    {
        Rng rng(0xE4);
        for (int t = 0; t < 500; ++t) {
            CoeffSeq a(1 + rng.below(64));
            for (double& v : a) v = rng.normal();
            const double p = 1.0 + 3.0 * rng.uniform();
            if (weak_lp_norm(a, p) > lp_norm(a, p) * (1 + 1e-12)) {
                detail = "weak lp exceeded lp";
                return false;
            }
        }
    }
    // min-norm-point optimality certificate
    {
        Rng rng(0xE5);
        for (int t = 0; t < 100; ++t) {
            const std::size_t m = 2 + rng.below(15);
            const std::size_t nn = 1 + rng.below(6);
            std::vector<Vec> pts(m, Vec(nn));
            const double off = rng.uniform(0.0, 2.0);
            for (Vec& p : pts) {
                for (double& v : p) v = rng.normal();
                p[0] += off;
            }
            const double tol = 1e-8;
            const auto r = min_norm_point(pts, tol);
            const double vv = dot(r.point, r.point);
            for (const Vec& p : pts)
                if (dot(p, r.point) < vv - tol * (1 + vv)) {
                    detail = "min-norm certificate violated";
                    return false;
                }
        }
    }
    detail = "all exact-law fuzz suites clean";
    return true;
}

} // namespace

int main() {
    std::printf("acceptance suite\n----------------\n");
    run_criterion(1, "oracle-equivalence", criterion_oracle_equivalence);
    run_criterion(2, "regularization-exhaustive", criterion_regularization_exhaustive);
    run_criterion(3, "structure-pipeline", criterion_structure_pipeline);
    run_criterion(4, "decoupling-self-audit", criterion_decoupling);
    run_criterion(5, "subgaussian-rate", criterion_subgaussian_rate);
    run_criterion(6, "heavy-tail-rate", criterion_heavy_tail_rate);
    run_criterion(7, "bai-yin-edges", criterion_baiyin_edges);
    run_criterion(8, "coupon-collector", criterion_coupon);
    run_criterion(9, "frame-m-independence", criterion_frame_m_independence);
    run_criterion(10, "exact-law-suite", criterion_exact_laws);

    int fails = 0;
    for (const auto& c : g_results) fails += !c.pass;
    std::printf("----------------\n%d/%zu criteria passed\n", static_cast<int>(g_results.size()) - fails,
                g_results.size());
    return fails;
}
