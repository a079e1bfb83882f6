#include "covest/decoupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <json.hpp>

#include "covest/contracts.hpp"
#include "covest/min_norm_point.hpp"
#include "covest/rng.hpp"

namespace covest {

using nlohmann::json;

std::string to_string(DecoupleStatus s) {
    switch (s) {
        case DecoupleStatus::success: return "success";
        case DecoupleStatus::precondition_largeness: return "precondition-largeness";
        case DecoupleStatus::no_witness: return "no-witness";
        case DecoupleStatus::selection_failed: return "selection-failed";
    }
    return "?";
}

WitnessResult separation_witness(const std::vector<Vec>& X, std::span<const double> a, double tol,
                                 int max_iter) {
    require(X.size() == a.size(), "separation_witness: size mismatch");
    require(!X.empty(), "separation_witness: empty input");
    require(tol > 0.0, "separation_witness: tol must be positive");
    for (double ai : a) require(ai != 0.0, "separation_witness: a_i must be nonzero");

    std::vector<Vec> scaled;
    scaled.reserve(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
        Vec u = X[i];
        scale(u, 1.0 / a[i]);
        scaled.push_back(std::move(u));
    }
    MinNormResult mnp = min_norm_point(scaled, tol, max_iter);
    const double vn = norm2(mnp.point);
    if (vn < 1.0 - tol) {
        throw NoWitnessError("separation_witness: min-norm point has norm " + std::to_string(vn) +
                                 " < 1 - tol; no unit direction separates at level 1",
                             vn);
    }
    WitnessResult w;
    w.v_norm = vn;
    w.x_bar = mnp.point;
    scale(w.x_bar, 1.0 / vn);
    w.lambda = std::move(mnp.lambda);
    for (double& l : w.lambda) l /= vn;
    return w;
}

MaureySelection maurey_select(const std::vector<Vec>& X, std::span<const double> lambda,
                              std::span<const double> a,
                              const std::vector<std::size_t>& I1_prime, int draws,
                              const Vec& residual_sum, std::uint64_t seed) {
    require(draws >= 1, "maurey_select: draws must be >= 1");
    const std::size_t n = X.empty() ? residual_sum.size() : X[0].size();

    // Cumulative weights over I1'; remaining probability mass goes to the
    // zero atom.
    std::vector<double> cdf;
    cdf.reserve(I1_prime.size());
    double total = 0.0;
    for (std::size_t i : I1_prime) {
        const double li = std::abs(lambda[i]);
        total += li;
        cdf.push_back(total);
    }
    require(total <= 1.0 + 1e-6, "maurey_select: lambda mass exceeds 1");

    Rng rng = Rng::from_parts(seed, seed_of_string("maurey"));
    MaureySelection sel;
    sel.drawn.reserve(draws);
    sel.y_bar.assign(n, 0.0);
    Vec yj(n);
    for (int d = 0; d < draws; ++d) {
        const double u = rng.uniform();
        long pick = -1;
        if (u < total) {
            const std::size_t pos = std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
            pick = static_cast<long>(I1_prime[std::min(pos, I1_prime.size() - 1)]);
        }
        sel.drawn.push_back(pick);
        yj = residual_sum;
        if (pick >= 0) axpy(yj, 1.0 / a[static_cast<std::size_t>(pick)], X[static_cast<std::size_t>(pick)]);
        axpy(sel.y_bar, 1.0 / draws, yj);
    }
    return sel;
}

namespace {

void perturb_duplicates(std::vector<Vec>& X) {
    const std::size_t m = X.size();
    const std::size_t n = X[0].size();
    bool any = false;
    std::map<std::vector<double>, std::size_t> seen;
    for (std::size_t i = 0; i < m; ++i) {
        auto [it, fresh] = seen.emplace(X[i], i);
        if (!fresh) {
            const double s = 1e-12 * std::max(1.0, norm2(X[i]));
            X[i][i % n] += s * (1.0 + static_cast<double>(i % 7));
            any = true;
        }
    }
    if (any) {
        // One more pass in case a perturbation landed on an existing vector.
        std::set<std::vector<double>> uniq(X.begin(), X.end());
        require(uniq.size() == m, "decouple: duplicate perturbation failed");
    }
}

} // namespace

DecoupleResult decouple(const std::vector<Vec>& X_in, const Vec& x, const DecouplingParams& params,
                        std::uint64_t seed) {
    DecoupleResult out;
    const std::size_t m = X_in.size();
    if (m < 4) {
        out.status = DecoupleStatus::precondition_largeness;
        out.message = "need m >= 4 vectors";
        return out;
    }
    const std::size_t n = x.size();
    for (const Vec& v : X_in)
        require(v.size() == n, "decouple: vector dimensions must match x");
    require(params.r >= 1.0 && params.r < std::min(params.r_prime, params.r_double_prime),
            "decouple: need 1 <= r < min(r', r'')");
    require(params.delta > 0.0 && params.delta < 1.0, "decouple: delta must be in (0,1)");
    require(params.alpha > 0.0 && params.alpha <= 1.0, "decouple: alpha must be in (0,1]");

    std::vector<Vec> X = X_in;
    perturb_duplicates(X);

    const std::size_t N = params.N ? params.N : m;
    const double nbar =
        static_cast<double>(n) +
        std::pow(static_cast<double>(N) / m, 1.0 / params.r) * static_cast<double>(m);

    CoeffSeq a(m);
    CoeffSeq b(m);
    for (std::size_t i = 0; i < m; ++i) {
        a[i] = dot(X[i], x);
        const double s = a[i] / params.K3;
        b[i] = s * s / nbar;
    }

    StructureCertificate cert;
    try {
        StructureConfig cfg;
        cfg.divergence_c = params.structure_divergence_c;
        cfg.l_large_factor = params.structure_l_large_factor;
        cert = extract_structure(b, params.alpha, params.structure_K, cfg);
    } catch (const ContractError& e) {
        out.status = DecoupleStatus::precondition_largeness;
        out.message = e.what();
        return out;
    }

    std::vector<Vec> XI1;
    CoeffSeq aI1;
    XI1.reserve(cert.I1.size());
    for (std::size_t i : cert.I1) {
        if (a[i] == 0.0) {
            out.status = DecoupleStatus::precondition_largeness;
            out.message = "zero coefficient a_i inside I1";
            return out;
        }
        XI1.push_back(X[i]);
        aI1.push_back(a[i]);
    }

    WitnessResult witness;
    try {
        witness = separation_witness(XI1, aI1, params.tol, params.min_norm_max_iter);
    } catch (const NoWitnessError& e) {
        out.status = DecoupleStatus::no_witness;
        out.message = e.what();
        return out;
    } catch (const ConvergenceError& e) {
        out.status = DecoupleStatus::no_witness;
        out.message = std::string("min-norm solver did not converge: ") + e.what();
        return out;
    }

    CoeffSeq lambda(m, 0.0);
    for (std::size_t k = 0; k < cert.I1.size(); ++k) lambda[cert.I1[k]] = witness.lambda[k];

    RefinedSet refined;
    try {
        refined = refine_structure(cert, lambda);
    } catch (const ContractError& e) {
        out.status = DecoupleStatus::precondition_largeness;
        out.message = e.what();
        return out;
    }

    const double n2 = static_cast<double>(refined.I2.size());
    const double lam_cap = params.C_alpha / n2;
    std::vector<std::size_t> I1p, I2p, I1_minus;
    for (std::size_t i : cert.I1)
        (lambda[i] <= lam_cap ? I1p : I1_minus).push_back(i);
    for (std::size_t i : refined.I2)
        if (lambda[i] <= lam_cap) I2p.push_back(i);

    Vec residual_sum(n, 0.0);
    for (std::size_t i : I1_minus) axpy(residual_sum, lambda[i] / a[i], X[i]);

    const int draws = std::max(1, static_cast<int>(std::ceil(n2 / params.c_alpha_prime())));

    const double y_norm_cap = params.y_norm_mult() * cert.l *
                              static_cast<double>(cert.I1.size()) / n2;

    std::string last_failure = "no attempts";
    for (int attempt = 0; attempt < params.max_retries; ++attempt) {
        MaureySelection sel = maurey_select(X, lambda, a, I1p, draws,
                                            residual_sum, seed_combine(seed, attempt));
        const double ybar2 = dot(sel.y_bar, sel.y_bar);
        if (ybar2 <= 0.0) {
            last_failure = "selection produced the zero vector";
            continue;
        }
        if (ybar2 > y_norm_cap) {
            last_failure = "||ybar||^2 = " + std::to_string(ybar2) + " exceeds cap " +
                           std::to_string(y_norm_cap);
            continue;
        }

        // Z_k with the diagonal removed: zero out every draw that picked k.
        std::vector<std::size_t> I;
        std::vector<std::pair<std::size_t, double>> Zs;
        Vec uk(n);
        for (std::size_t k : I2p) {
            int collisions = 0;
            for (long didx : sel.drawn)
                if (didx == static_cast<long>(k)) ++collisions;
            uk = X[k];
            scale(uk, 1.0 / a[k]);
            double Zk = dot(uk, sel.y_bar);
            if (collisions > 0) {
                // remove the diagonal contribution (1/draws per colliding draw)
                Zk -= collisions * dot(uk, uk) / (draws * 1.0);
            }
            Zs.emplace_back(k, Zk);
            if (Zk >= 0.25 && collisions == 0) I.push_back(k);
        }

        std::set<std::size_t> Jset(I1_minus.begin(), I1_minus.end());
        for (long didx : sel.drawn)
            if (didx >= 0) Jset.insert(static_cast<std::size_t>(didx));
        std::vector<std::size_t> J(Jset.begin(), Jset.end());

        if (I.empty()) {
            last_failure = "no index passed the Z_k >= 1/4 test";
            continue;
        }
        if (J.empty()) {
            last_failure = "selection produced an empty carrier set J";
            continue;
        }
        if (static_cast<double>(J.size()) > params.delta * static_cast<double>(I.size())) {
            last_failure = "|J| = " + std::to_string(J.size()) + " > delta |I| = " +
                           std::to_string(params.delta * static_cast<double>(I.size()));
            continue;
        }

        DecouplingCertificate c;
        c.I = std::move(I);
        c.J = std::move(J);
        c.y = sel.y_bar;
        scale(c.y, 1.0 / std::sqrt(ybar2));
        c.threshold = params.K3 * params.K3 *
                      std::pow(static_cast<double>(N) / static_cast<double>(c.I.size()),
                               1.0 / params.r_double_prime);
        c.selection_record = sel.drawn;
        c.ybar_norm2 = ybar2;
        c.Z = std::move(Zs);
        c.retries_used = attempt;
        c.structure = cert;
        c.refined = refined;

        bool threshold_ok = true;
        for (std::size_t k : c.I) {
            const double ip = dot(X[k], c.y);
            if (ip * ip < c.threshold * (1.0 - 1e-12)) {
                threshold_ok = false;
                break;
            }
        }
        if (!threshold_ok) {
            last_failure = "inner-product threshold failed on I";
            continue;
        }

        // Pipeline self-audit: every emitted certificate must verify.
        DecouplingReport audit = check_decoupling(c, X_in, params);
        if (!audit.all_pass) {
            last_failure = "self-audit failed: " + audit.to_json();
            continue;
        }
        out.status = DecoupleStatus::success;
        out.certificate = std::move(c);
        out.message = "ok";
        return out;
    }

    out.status = DecoupleStatus::selection_failed;
    out.message = "selection failed after " + std::to_string(params.max_retries) +
                  " retries; last: " + last_failure;
    return out;
}

DecouplingReport check_decoupling(const DecouplingCertificate& cert, const std::vector<Vec>& X,
                                  const DecouplingParams& params) {
    DecouplingReport rep;
    auto item = [&](std::string name, double lhs, double rhs) {
        CheckItem it;
        it.name = std::move(name);
        it.lhs = lhs;
        it.rhs = rhs;
        it.slack = lhs - rhs;
        it.pass = lhs >= rhs - 1e-12 * std::max({1.0, std::abs(lhs), std::abs(rhs)});
        rep.items.push_back(it);
    };

    std::set<std::size_t> Iset(cert.I.begin(), cert.I.end());
    bool disjoint = true;
    for (std::size_t j : cert.J) disjoint = disjoint && !Iset.count(j);
    item("disjoint", disjoint ? 1.0 : 0.0, 1.0);
    item("I_nonempty", static_cast<double>(cert.I.size()), 1.0);
    item("J_nonempty", static_cast<double>(cert.J.size()), 1.0);
    item("size_ratio", params.delta * static_cast<double>(cert.I.size()),
         static_cast<double>(cert.J.size()));

    const double ny = norm2(cert.y);
    item("unit_norm", 1e-10, std::abs(ny - 1.0));

    std::vector<Vec> basis;
    basis.reserve(cert.J.size());
    for (std::size_t j : cert.J) basis.push_back(X[j]);
    item("span_membership", 1e-8, span_residual(basis, cert.y));

    const std::size_t N = params.N ? params.N : X.size();
    const double expect_threshold =
        params.K3 * params.K3 *
        std::pow(static_cast<double>(N) / static_cast<double>(cert.I.size()),
                 1.0 / params.r_double_prime);
    item("threshold_value", 1e-9, std::abs(cert.threshold - expect_threshold) /
                                      std::max(1.0, expect_threshold));

    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i : cert.I) {
        const double ip = dot(X[i], cert.y);
        worst = std::min(worst, ip * ip - cert.threshold);
    }
    item("inner_product_threshold", worst, 0.0);

    rep.all_pass = true;
    for (const CheckItem& it : rep.items) rep.all_pass = rep.all_pass && it.pass;
    return rep;
}

DecoupleInstance make_near_duplicate_instance(std::size_t n, std::size_t m, std::uint64_t seed) {
    require(n >= 8 && m >= 64, "make_near_duplicate_instance: too small");
    Rng rng = Rng::from_parts(seed, seed_of_string("near_duplicate_instance"));

    DecoupleInstance inst;
    inst.x.assign(n, 0.0);
    for (double& v : inst.x) v = rng.normal();
    scale(inst.x, 1.0 / norm2(inst.x));
    const Vec& u = inst.x;

    auto orthogonal_unit = [&]() {
        Vec w(n);
        for (double& v : w) v = rng.normal();
        axpy(w, -dot(w, u), u);
        const double nw = norm2(w);
        for (double& v : w) v /= nw;
        return w;
    };

    // Layered clusters: block j holds points whose squared projection on u is
    // 1.5 * 2^{-j} * nbar, sized to keep the weak-l1 profile just under 1.
    const double nbar = static_cast<double>(n) + static_cast<double>(m);
    const int jmin = static_cast<int>(std::ceil(std::log2(1.5 * nbar / static_cast<double>(n))));
    const int jmax = static_cast<int>(std::floor(std::log2(static_cast<double>(m))));
    const std::size_t dup_block = jmin + 1; // the lambda magnet

    std::size_t used = 0;
    std::size_t cum = 0;
    for (int j = jmin; j <= jmax && used < m; ++j) {
        const std::size_t cap = static_cast<std::size_t>(std::ldexp(1.0, j) / 1.5);
        std::size_t sj = (cap > cum) ? cap - cum : 0;
        sj = std::min(sj, m - used);
        cum += sj;
        const double aj = std::sqrt(1.5 * std::ldexp(1.0, -j) * nbar);
        const double noise = std::sqrt(std::max(0.0, static_cast<double>(n) - aj * aj));
        for (std::size_t s = 0; s < sj; ++s) {
            Vec w = orthogonal_unit();
            Vec p(n);
            const double beta =
                (static_cast<std::size_t>(j) == dup_block) ? 1e-6 * noise : noise;
            for (std::size_t i = 0; i < n; ++i) p[i] = aj * u[i] + beta * w[i];
            inst.X.push_back(std::move(p));
            ++used;
        }
    }
    // Pad with isotropic noise orthogonal to u (zero projection, dropped by
    // the block decomposition).
    const double sqn = std::sqrt(static_cast<double>(n));
    while (used < m) {
        Vec w = orthogonal_unit();
        scale(w, sqn);
        inst.X.push_back(std::move(w));
        ++used;
    }
    return inst;
}

std::string DecouplingParams::to_json() const {
    json j;
    j["r"] = r;
    j["r_prime"] = r_prime;
    j["r_double_prime"] = r_double_prime;
    j["delta"] = delta;
    j["alpha"] = alpha;
    j["C_alpha"] = C_alpha;
    j["K1"] = K1;
    j["K2"] = K2;
    j["K3"] = K3;
    j["N"] = N;
    j["tol"] = tol;
    j["structure_K"] = structure_K;
    j["structure_divergence_c"] = structure_divergence_c;
    j["structure_l_large_factor"] = structure_l_large_factor;
    j["y_norm_multiple"] = y_norm_multiple;
    j["max_retries"] = max_retries;
    return j.dump();
}

DecouplingParams DecouplingParams::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ContractError(std::string("params JSON parse error: ") + e.what());
    }
    DecouplingParams p;
    p.r = j.value("r", p.r);
    p.r_prime = j.value("r_prime", p.r_prime);
    p.r_double_prime = j.value("r_double_prime", p.r_double_prime);
    p.delta = j.value("delta", p.delta);
    p.alpha = j.value("alpha", p.alpha);
    p.C_alpha = j.value("C_alpha", p.C_alpha);
    p.K1 = j.value("K1", p.K1);
    p.K2 = j.value("K2", p.K2);
    p.K3 = j.value("K3", p.K3);
    p.N = j.value("N", p.N);
    p.tol = j.value("tol", p.tol);
    p.structure_K = j.value("structure_K", p.structure_K);
    p.structure_divergence_c = j.value("structure_divergence_c", p.structure_divergence_c);
    p.structure_l_large_factor = j.value("structure_l_large_factor", p.structure_l_large_factor);
    p.y_norm_multiple = j.value("y_norm_multiple", p.y_norm_multiple);
    p.max_retries = j.value("max_retries", p.max_retries);
    return p;
}

std::string DecouplingCertificate::to_json() const {
    json j;
    j["I"] = I;
    j["J"] = J;
    j["y"] = y;
    j["threshold"] = threshold;
    j["selection_record"] = selection_record;
    j["ybar_norm2"] = ybar_norm2;
    j["retries_used"] = retries_used;
    json z = json::array();
    for (const auto& [k, v] : Z) z.push_back({{"k", k}, {"Z", v}});
    j["Z"] = std::move(z);
    j["structure"] = json::parse(structure.to_json());
    j["I2"] = refined.I2;
    j["j0"] = refined.j0;
    return j.dump();
}

std::string DecouplingReport::to_json() const {
    json j;
    j["all_pass"] = all_pass;
    json items_json = json::array();
    for (const CheckItem& it : items) {
        items_json.push_back({{"name", it.name},
                              {"pass", it.pass},
                              {"lhs", it.lhs},
                              {"rhs", it.rhs},
                              {"slack", it.slack}});
    }
    j["items"] = std::move(items_json);
    return j.dump();
}

} // namespace covest
