#include "covest/structure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "covest/contracts.hpp"

namespace covest {

using nlohmann::json;

namespace {

constexpr double EPS = 1e-12;

double log2log2(std::size_t m) { return std::log2(std::log2(static_cast<double>(m))); }

// Unique j with 2^{-j} < v <= 2^{-j+1}, for v in (0, 1].
int block_index(double v) {
    int j = static_cast<int>(std::ceil(-std::log2(v)));
    if (j < 1) j = 1;
    while (std::ldexp(1.0, -j) >= v) ++j;
    while (j > 1 && std::ldexp(1.0, -(j - 1)) < v) --j;
    return j;
}

} // namespace

BlockDecomposition block_decompose(std::span<const double> b) {
    require(!b.empty(), "block_decompose: empty sequence");
    const std::size_t m = b.size();
    const double w1 = weak_lp_norm(b, 1.0);
    require(w1 <= 1.0 + EPS, "block_decompose: ||b||_{1,inf} must be <= 1 (got " +
                                 std::to_string(w1) + ")");

    BlockDecomposition d;
    d.m = m;
    d.max_block_index = static_cast<int>(std::ceil(std::log2(static_cast<double>(m))));
    const double floor_val = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double v = std::abs(b[i]);
        if (v <= floor_val) {
            d.dropped.push_back(i);
            continue;
        }
        const int j = block_index(v);
        d.blocks[j].push_back(i);
        d.contributions[j] += v;
    }
    // Markov sanity: the count of entries above 2^{-j} is below 2^j.
    std::size_t cum = 0;
    for (const auto& [j, idx] : d.blocks) {
        cum += idx.size();
        require(static_cast<double>(cum) <= std::ldexp(1.0, j) * (1.0 + 1e-9),
                "block_decompose: Markov block-size invariant violated");
    }
    return d;
}

RegularizeResult regularize(const std::vector<int>& J, int L, double alpha) {
    require(!J.empty(), "regularize: J must be nonempty");
    require(alpha > 0.0 && alpha <= 1.0, "regularize: alpha must be in (0, 1]");
    std::vector<int> s(J);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    require(s.front() >= 1 && s.back() <= L, "regularize: J must be a subset of [L]");

    const int l = static_cast<int>(s.size());
    const int j0 = s[(l + 1) / 2 - 1]; // the ceil(l/2)-th smallest element

    // Geometric progression j^(k) = (1+alpha)^k j^(0); K_steps = first k
    // reaching L.
    std::vector<double> prog{static_cast<double>(j0)};
    while (prog.back() < static_cast<double>(L)) prog.push_back(prog.back() * (1.0 + alpha));
    const int k_steps = std::max<int>(1, static_cast<int>(prog.size()) - 1);
    if (prog.size() == 1) prog.push_back(prog.back() * (1.0 + alpha));

    const double threshold = static_cast<double>(l) / (3.0 * k_steps);

    RegularizeResult out;
    out.k_steps = k_steps;
    out.density_bound = threshold;
    for (int k = 1; k <= k_steps; ++k) {
        const double lo = prog[k - 1];
        const double hi = prog[k];
        std::size_t count = 0;
        int first = 0, last = 0;
        for (int j : s) {
            if (j >= lo - EPS && j <= hi + EPS) {
                if (count == 0) first = j;
                last = j;
                ++count;
            }
        }
        if (static_cast<double>(count) >= threshold && count >= 1) {
            out.j1 = first;
            out.j2 = last;
            out.achieved_count = count;
            return out;
        }
    }
    // The counting argument guarantees a qualifying interval exists.
    throw ContractError("regularize: no interval met the density threshold");
}

StructureCertificate extract_structure(std::span<const double> b, double alpha, double K,
                                       StructureConfig cfg) {
    const std::size_t m = b.size();
    require(m >= 4, "extract_structure: need m >= 4");
    require(alpha > 0.0 && alpha <= 1.0, "extract_structure: alpha must be in (0, 1]");
    require(K > 0.0, "extract_structure: K must be positive");

    StructureCertificate cert;
    cert.m = m;
    cert.alpha = alpha;
    cert.K = K;
    cert.loglog_m = log2log2(m);

    const double C = cfg.divergence_c < 0.0 ? 10.0 / alpha : cfg.divergence_c;
    cert.divergence_required = C * K * cert.loglog_m;
    double l1 = 0.0;
    for (double v : b) l1 += std::abs(v);
    cert.divergence_achieved = l1;
    if (l1 < cert.divergence_required) {
        throw ContractError("extract_structure: divergence precondition unmet: ||b||_1 = " +
                            std::to_string(l1) + " < required " +
                            std::to_string(cert.divergence_required));
    }

    cert.blocks = block_decompose(b); // also enforces the weak-l1 precondition
    const int Lb = cert.blocks.max_block_index;

    // Level l: the deepest rank at which the rearranged contributions still
    // clear K/j.
    std::vector<double> bstar;
    bstar.reserve(cert.blocks.contributions.size());
    for (const auto& [j, Bj] : cert.blocks.contributions) bstar.push_back(Bj);
    std::sort(bstar.begin(), bstar.end(), std::greater<>());
    int l = 0;
    for (int j = 1; j <= Lb; ++j) {
        const double Bj = (j <= static_cast<int>(bstar.size())) ? bstar[j - 1] : 0.0;
        if (Bj >= K / j - EPS) l = j;
    }
    if (l == 0) throw ContractError("extract_structure: no dominant block (l = 0)");
    cert.l = l;
    const double l_floor = cfg.l_large_factor * K * cert.loglog_m;
    if (static_cast<double>(l) < l_floor - EPS) {
        throw ContractError("extract_structure: level l = " + std::to_string(l) +
                            " below required " + std::to_string(l_floor));
    }
    cert.k_meets_asymptotic_floor = K >= 8.0 * cert.loglog_m;

    for (const auto& [j, Bj] : cert.blocks.contributions)
        if (Bj >= K / l - EPS) cert.J_bar.push_back(j);

    // Regularize the reflected block indices {Lb + 1 - j}. The reflection
    // turns "deep blocks" into "large indices" so the lemma's l/2 lower bound
    // becomes an upper bound on the window position.
    std::vector<int> reflected;
    reflected.reserve(cert.J_bar.size());
    for (int j : cert.J_bar) reflected.push_back(Lb + 1 - j);
    cert.reg = regularize(reflected, Lb, alpha / 2.0);
    cert.j_prime = Lb + 1 - cert.reg.j1;
    cert.j_double_prime = Lb + 1 - cert.reg.j2;

    for (int j : cert.J_bar)
        if (j >= cert.j_double_prime && j <= cert.j_prime) cert.J.push_back(j);
    std::sort(cert.J.begin(), cert.J.end());

    for (int j : cert.J) {
        const auto& idx = cert.blocks.blocks.at(j);
        cert.I1.insert(cert.I1.end(), idx.begin(), idx.end());
    }
    std::sort(cert.I1.begin(), cert.I1.end());
    require(!cert.I1.empty(), "extract_structure: empty I1");

    cert.j_large_required = 8.0 * l / K;
    cert.j_large_ok = static_cast<double>(cert.J.size()) >= cert.j_large_required - EPS;

    // Certificate postconditions; fail loudly rather than weaken.
    const double n1 = static_cast<double>(cert.I1.size());
    const double lhs = std::exp2(l / 2.0);
    const double rhs = static_cast<double>(m) / n1;
    if (lhs > rhs * (1.0 + EPS)) {
        throw ContractError("extract_structure: regularity 2^{l/2} <= m/|I1| failed (" +
                            std::to_string(lhs) + " > " + std::to_string(rhs) + ")");
    }
    const double large_floor = K / (2.0 * l * n1);
    for (std::size_t i : cert.I1) {
        if (std::abs(b[i]) < large_floor * (1.0 - EPS)) {
            throw ContractError("extract_structure: largeness b_i >= K/(2 l n1) failed at index " +
                                std::to_string(i));
        }
    }
    return cert;
}

RefinedSet refine_structure(const StructureCertificate& cert, std::span<const double> lambda) {
    require(lambda.size() == cert.m, "refine_structure: lambda must be indexed like b");
    RefinedSet out;
    out.lambda.assign(lambda.begin(), lambda.end());
    for (double& v : out.lambda) v = std::abs(v);

    double mass = 0.0;
    for (std::size_t i : cert.I1) mass += out.lambda[i];
    require(mass <= 1.0 + 1e-6, "refine_structure: ||lambda||_1 over I1 must be <= 1");

    // Pigeonhole: the J-block with the smallest lambda contribution.
    const double budget = cert.K / (8.0 * cert.l);
    int j0 = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int j : cert.J) {
        double Lj = 0.0;
        for (std::size_t i : cert.blocks.blocks.at(j)) Lj += out.lambda[i];
        if (Lj < best) {
            best = Lj;
            j0 = j;
        }
    }
    if (!(best <= budget + EPS)) {
        throw ContractError(
            "refine_structure: no block with lambda contribution <= K/(8l) = " +
            std::to_string(budget) + " (best " + std::to_string(best) + " over |J| = " +
            std::to_string(cert.J.size()) + " blocks); the certificate's J is too small "
            "for this lambda");
    }
    out.j0 = j0;
    out.L_j0 = best;

    const auto& omega = cert.blocks.blocks.at(j0);
    const double mj0 = static_cast<double>(omega.size());
    const double thresh = cert.K / (4.0 * cert.l * mj0);
    for (std::size_t i : omega)
        if (out.lambda[i] <= thresh + EPS) out.I2.push_back(i);

    require(2 * out.I2.size() >= omega.size(),
            "refine_structure: Markov half-size bound failed (internal)");
    return out;
}

namespace {

CheckItem make_item(std::string name, double lhs, double rhs) {
    // Convention: pass iff lhs >= rhs (up to relative slack).
    CheckItem it;
    it.name = std::move(name);
    it.lhs = lhs;
    it.rhs = rhs;
    it.slack = lhs - rhs;
    it.pass = lhs >= rhs - EPS * std::max({1.0, std::abs(lhs), std::abs(rhs)});
    return it;
}

} // namespace

StructureReport check_structure(const StructureCertificate& cert, const RefinedSet* refined,
                                std::span<const double> b, std::span<const double> lambda,
                                double alpha, double K) {
    StructureReport rep;
    const double m = static_cast<double>(cert.m);
    const double n1 = static_cast<double>(cert.I1.size());
    const int l = cert.l;

    // I1 is exactly the union of its window blocks.
    {
        std::vector<std::size_t> expect;
        for (int j : cert.J) {
            auto it = cert.blocks.blocks.find(j);
            if (it != cert.blocks.blocks.end())
                expect.insert(expect.end(), it->second.begin(), it->second.end());
        }
        std::sort(expect.begin(), expect.end());
        rep.items.push_back(make_item("containment_I1_blocks", expect == cert.I1 ? 1.0 : 0.0, 1.0));
    }

    rep.items.push_back(make_item("regularity_m_over_n1", m / n1, std::exp2(l / 2.0)));

    double min_b_i1 = std::numeric_limits<double>::infinity();
    for (std::size_t i : cert.I1) min_b_i1 = std::min(min_b_i1, std::abs(b[i]));
    rep.items.push_back(make_item("largeness_I1", min_b_i1, K / (2.0 * l * n1)));

    bool strict_i2 = true;
    if (refined != nullptr) {
        const double n2 = static_cast<double>(refined->I2.size());
        const double mj0 = static_cast<double>(cert.blocks.block_size(refined->j0));

        // containment I2 within its block, block within I1
        bool contained = true;
        const auto& omega = cert.blocks.blocks.at(refined->j0);
        for (std::size_t i : refined->I2)
            contained = contained && std::binary_search(omega.begin(), omega.end(), i);
        bool block_in_i1 = std::binary_search(cert.J.begin(), cert.J.end(), refined->j0);
        rep.items.push_back(
            make_item("containment_I2", (contained && block_in_i1) ? 1.0 : 0.0, 1.0));

        rep.items.push_back(make_item("regularity_monotone", n1, n2));
        rep.items.push_back(make_item("regularity_exponent", std::pow(m / n1, 1.0 + alpha), m / n2));
        rep.items.push_back(make_item("I2_half", n2, mj0 / 2.0));
        rep.items.push_back(make_item("pigeonhole_Lj0", K / (8.0 * l), refined->L_j0));

        double min_b_i2 = std::numeric_limits<double>::infinity();
        double min_dom = std::numeric_limits<double>::infinity();
        for (std::size_t i : refined->I2) {
            min_b_i2 = std::min(min_b_i2, std::abs(b[i]));
            const double li = (i < lambda.size()) ? std::abs(lambda[i]) : 0.0;
            min_dom = std::min(min_dom, std::abs(b[i]) - 2.0 * li);
        }
        auto strict = make_item("largeness_I2_strict", min_b_i2, K / (2.0 * l * n2));
        strict_i2 = strict.pass;
        rep.items.push_back(strict);
        rep.items.push_back(make_item("largeness_I2_relaxed", min_b_i2, K / (2.0 * l * mj0)));
        rep.items.push_back(make_item("domination", min_dom, 0.0));
    }

    rep.j_large_ok = cert.j_large_ok;
    bool all = true;
    for (const CheckItem& it : rep.items)
        if (it.name != "largeness_I2_strict") all = all && it.pass;
    rep.pass_with_relaxed_i2 = all;
    rep.pass_strict = all && strict_i2;
    return rep;
}

std::string StructureCertificate::to_json() const {
    json j;
    j["m"] = m;
    j["alpha"] = alpha;
    j["K"] = K;
    j["l"] = l;
    j["J_bar"] = J_bar;
    j["J"] = J;
    j["j_prime"] = j_prime;
    j["j_double_prime"] = j_double_prime;
    j["I1"] = I1;
    j["loglog_m"] = loglog_m;
    j["divergence_required"] = divergence_required;
    j["divergence_achieved"] = divergence_achieved;
    j["k_meets_asymptotic_floor"] = k_meets_asymptotic_floor;
    j["j_large_ok"] = j_large_ok;
    j["j_large_required"] = j_large_required;
    j["regularize"] = {{"j1", reg.j1},
                       {"j2", reg.j2},
                       {"density_bound", reg.density_bound},
                       {"achieved_count", reg.achieved_count},
                       {"k_steps", reg.k_steps}};
    json blocks_json = json::object();
    for (const auto& [jj, idx] : blocks.blocks) {
        blocks_json[std::to_string(jj)] = {{"size", idx.size()},
                                           {"contribution", blocks.contribution(jj)},
                                           {"indices", idx}};
    }
    j["blocks"] = std::move(blocks_json);
    j["dropped_count"] = blocks.dropped.size();
    return j.dump();
}

std::string StructureReport::to_json() const {
    json j;
    j["pass_with_relaxed_i2"] = pass_with_relaxed_i2;
    j["pass_strict"] = pass_strict;
    j["j_large_ok"] = j_large_ok;
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
