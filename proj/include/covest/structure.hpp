#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "covest/sequences.hpp"

namespace covest {

/// Dyadic block decomposition of a coefficient sequence with weak-l1 norm at
/// most 1. Block j holds the indices with 2^{-j} < |b_i| <= 2^{-j+1}; entries
/// with |b_i| <= 1/m are dropped.
struct BlockDecomposition {
    std::size_t m = 0;
    int max_block_index = 0;                       // ceil(log2 m)
    std::map<int, std::vector<std::size_t>> blocks; // j -> Omega_j
    std::map<int, double> contributions;            // j -> B_j
    std::vector<std::size_t> dropped;

    std::size_t block_size(int j) const {
        auto it = blocks.find(j);
        return it == blocks.end() ? 0 : it->second.size();
    }
    double contribution(int j) const {
        auto it = contributions.find(j);
        return it == contributions.end() ? 0.0 : it->second;
    }
};

BlockDecomposition block_decompose(std::span<const double> b);

struct RegularizeResult {
    int j1 = 0;
    int j2 = 0;
    double density_bound = 0.0; // l / (3 K_steps)
    std::size_t achieved_count = 0;
    int k_steps = 0;
};

/// Regularization step: finds j1 <= j2 in J with l/2 <= j1 and
/// j2 <= (1+alpha) j1 such that |J ∩ [j1, j2]| >= |J| / (3 K_steps), where
/// K_steps counts the geometric progression (1+alpha)^k started at the
/// median-rank element of J. Deterministic: the first qualifying interval of
/// the progression is chosen, endpoints snapped inward to members of J.
RegularizeResult regularize(const std::vector<int>& J, int L, double alpha);

struct StructureConfig {
    // Divergence threshold C(alpha): require ||b||_1 >= C * K * log2 log2 m.
    // Negative means the default 10 / alpha.
    double divergence_c = -1.0;
    // Required l >= factor * K * log2 log2 m.
    double l_large_factor = 0.2;
};

struct StructureCertificate {
    std::size_t m = 0;
    double alpha = 0.0;
    double K = 0.0;
    BlockDecomposition blocks;
    int l = 0;
    std::vector<int> J_bar;
    std::vector<int> J;
    int j_prime = 0;        // upper end of the block window
    int j_double_prime = 0; // lower end
    std::vector<std::size_t> I1;

    // diagnostics
    double divergence_required = 0.0;
    double divergence_achieved = 0.0;
    double loglog_m = 0.0;
    bool k_meets_asymptotic_floor = false; // K >= 8 log2 log2 m (asymptotic regime)
    bool j_large_ok = false;          // |J| >= 8 l / K
    double j_large_required = 0.0;
    RegularizeResult reg;

    std::string to_json() const;
};

/// Extracts the divergent-series structure: the level l, the window of heavy
/// blocks J and the index set I1 on which the coefficients are uniformly
/// large. Throws ContractError when the divergence precondition fails, no
/// block dominates, or a certificate postcondition cannot be met.
StructureCertificate extract_structure(std::span<const double> b, double alpha, double K,
                                       StructureConfig cfg = {});

struct RefinedSet {
    int j0 = 0;
    std::vector<std::size_t> I2;
    CoeffSeq lambda; // the (absolute) lambda actually used, full length m
    double L_j0 = 0.0;
};

/// Picks the block j0 in J with the smallest lambda-mass (must be at most
/// K/(8l)) and keeps the indices of Omega_j0 whose lambda is below
/// K/(4 l m_j0). lambda is indexed like b; entries outside I1 are ignored and
/// negative entries are replaced by their absolute value.
RefinedSet refine_structure(const StructureCertificate& cert, std::span<const double> lambda);

struct CheckItem {
    std::string name;
    bool pass = false;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0; // lhs - rhs in the direction that should be >= 0
};

struct StructureReport {
    std::vector<CheckItem> items;
    bool pass_with_relaxed_i2 = false; // prop (i) + (ii), I2 bound vs m_j0
    bool pass_strict = false;          // I2 bound vs n2 = |I2|
    bool j_large_ok = false;           // reported, not part of (i)/(ii)

    std::string to_json() const;
};

/// Evaluates every inequality of the structure proposition's conclusions on
/// the given certificate and refined set, reporting numeric slack per item.
/// Pure evaluation; nothing is thrown for failures.
StructureReport check_structure(const StructureCertificate& cert, const RefinedSet* refined,
                                std::span<const double> b, std::span<const double> lambda,
                                double alpha, double K);

} // namespace covest
