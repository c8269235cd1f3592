/**
 * @file cohomology.hpp
 * @brief Exact dimensions of the Fourier components H^q_{b,m} on the models.
 *
 * Weighted hypersurfaces: the m-th component of CR functions is spanned by
 * the weighted-homogeneous monomials z^a with sum a_j w_j = m, so dimensions
 * are lattice counts.  Circle bundles over the projective line: dimensions of
 * twists of the line bundle, counted by monomials (q = 0) and Serre duality
 * (q = 1); the metric perturbation plays no role.
 */
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crmorse/manifold.hpp"

namespace crmorse {

/// #\{ a in N^n : sum a_j w_j = m \}.
inline long long h0_weighted(const std::vector<int>& w, long long m) {
    if (detail::gcd_of(w) != 1)
        throw std::invalid_argument("weights must be coprime");
    if (m < 0) return 0;
    // One-variable-at-a-time convolution (bounded knapsack count).
    std::vector<long long> cnt(static_cast<std::size_t>(m) + 1, 0);
    cnt[0] = 1;
    for (int wi : w)
        for (long long v = wi; v <= m; ++v) cnt[v] += cnt[v - wi];
    return cnt[m];
}

/// dim H^q of the twist O(d m) over the projective line, q in {0,1}.
inline long long bundle_dim(int d, long long m, int q) {
    const long long k = static_cast<long long>(d) * m;
    if (q == 0) return k >= 0 ? k + 1 : 0;
    if (q == 1) {
        // Serre duality: dim H^1(O(k)) = dim H^0(O(-k-2)).
        const long long dual = -k - 2;
        return dual >= 0 ? dual + 1 : 0;
    }
    throw std::invalid_argument("bundle cohomology degrees are q in {0,1}");
}

enum class DimMethod { Lattice, Monomial, Duality, GramRank, Unsupported };

inline const char* to_string(DimMethod m) {
    switch (m) {
        case DimMethod::Lattice: return "lattice";
        case DimMethod::Monomial: return "monomial";
        case DimMethod::Duality: return "duality";
        case DimMethod::GramRank: return "gram_rank";
        default: return "unsupported";
    }
}

struct CohomologyEntry {
    std::optional<long long> dim;  // absent when no counting method applies
    DimMethod method = DimMethod::Unsupported;
};

struct CohomologyTable {
    std::map<std::pair<int, long long>, CohomologyEntry> entries;  // (q, m)

    std::optional<long long> dim(int q, long long m) const {
        auto it = entries.find({q, m});
        if (it == entries.end() || !it->second.dim) return std::nullopt;
        return it->second.dim;
    }
};

/// Fills the table for the requested ranges; unsupported combinations are
/// marked absent, never guessed.
inline CohomologyTable dims_table(const CRModel& model,
                                  const std::vector<long long>& m_range,
                                  const std::vector<int>& q_range) {
    CohomologyTable t;
    for (int q : q_range) {
        for (long long m : m_range) {
            CohomologyEntry e;
            if (const auto* hs = dynamic_cast<const HypersurfaceModel*>(&model)) {
                if (q == 0) {
                    e.dim = h0_weighted(hs->weights(), m);
                    e.method = DimMethod::Lattice;
                }
            } else if (const auto* cb = dynamic_cast<const CircleBundleModel*>(&model)) {
                if (q == 0 || q == 1) {
                    e.dim = bundle_dim(cb->degree(), m, q);
                    e.method = (q == 0) ? DimMethod::Monomial : DimMethod::Duality;
                }
            }
            t.entries[{q, m}] = e;
        }
    }
    return t;
}

/// Coefficients of prod_j (1 - t^{w_j})^{-1} up to t^order (series oracle).
inline std::vector<long long> weighted_count_series(const std::vector<int>& w,
                                                    int order) {
    std::vector<long long> c(static_cast<std::size_t>(order) + 1, 0);
    c[0] = 1;
    for (int wi : w)
        for (int v = wi; v <= order; ++v) c[v] += c[v - wi];
    return c;
}

}  // namespace crmorse
