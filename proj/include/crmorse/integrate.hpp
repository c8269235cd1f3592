/**
 * @file integrate.hpp
 * @brief Monte-Carlo estimation of the stratum integrals
 *        int_{X(q)} |det L| dv_X and their alternating partial sums.
 *
 * One deterministic sample stream is shared by all strata of a call: the
 * strata partition the samples, so differences of stratum integrals are
 * estimated with correlated samples and correspondingly smaller variance.
 * Degenerate points contribute to no stratum.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <future>
#include <stdexcept>
#include <string>
#include <vector>

#include "crmorse/levi.hpp"
#include "crmorse/manifold.hpp"

namespace crmorse {

struct MCEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::uint64_t n_samples = 0;
    std::uint64_t seed = 0;
    std::uint64_t rejected = 0;
    bool inconclusive = false;
};

namespace detail {

struct StratumAccumulator {
    std::vector<double> sum;
    std::vector<double> sumsq;
    std::vector<double> cross;  // pairwise products for signed-sum variance
    std::uint64_t rejected = 0;

    explicit StratumAccumulator(int q_count)
        : sum(q_count, 0.0), sumsq(q_count, 0.0),
          cross(static_cast<std::size_t>(q_count) * q_count, 0.0) {}

    void merge(const StratumAccumulator& o) {
        for (std::size_t i = 0; i < sum.size(); ++i) {
            sum[i] += o.sum[i];
            sumsq[i] += o.sumsq[i];
        }
        for (std::size_t i = 0; i < cross.size(); ++i) cross[i] += o.cross[i];
        rejected += o.rejected;
    }
};

/// Samples [begin, end) into per-stratum accumulators.  Each sample lands in
/// at most one stratum, so cross terms vanish sample-wise; they are kept for
/// the correlated variance of signed sums.
inline StratumAccumulator accumulate_strata(const CRModel& model, int q_count,
                                            std::uint64_t seed,
                                            std::uint64_t begin, std::uint64_t end,
                                            double degenerate_tol) {
    StratumAccumulator acc(q_count);
    for (std::uint64_t i = begin; i < end; ++i) {
        const SampleResult s = model.sample_point(seed, i);
        acc.rejected += s.rejected;
        const LeviSpectrum spec = levi_spectrum(model, s.x, degenerate_tol);
        const StratumClass cls = classify(spec, degenerate_tol);
        if (cls.degenerate || cls.q >= q_count) continue;
        const double v = s.weight * morse_integrand(spec);
        acc.sum[cls.q] += v;
        acc.sumsq[cls.q] += v * v;
    }
    return acc;
}

inline StratumAccumulator run_strata(const CRModel& model, int q_count,
                                     std::uint64_t n, std::uint64_t seed,
                                     double degenerate_tol, int workers) {
    constexpr std::uint64_t kSubstreams = 256;
    StratumAccumulator total(q_count);
    if (workers <= 1) {
        for (std::uint64_t c = 0; c < kSubstreams; ++c) {
            const std::uint64_t b = n * c / kSubstreams, e = n * (c + 1) / kSubstreams;
            total.merge(accumulate_strata(model, q_count, seed, b, e, degenerate_tol));
        }
        return total;
    }
    std::vector<std::future<StratumAccumulator>> futs;
    futs.reserve(kSubstreams);
    for (std::uint64_t c = 0; c < kSubstreams; ++c) {
        const std::uint64_t b = n * c / kSubstreams, e = n * (c + 1) / kSubstreams;
        futs.push_back(std::async(std::launch::async | std::launch::deferred,
                                  [&, b, e] {
                                      return accumulate_strata(model, q_count, seed, b,
                                                               e, degenerate_tol);
                                  }));
    }
    // Fixed merge order keeps the result independent of scheduling.
    for (auto& f : futs) total.merge(f.get());
    return total;
}

}  // namespace detail

/// Per-stratum integrals and their alternating partial sums, all from one
/// shared sample stream.
struct StrataResult {
    std::vector<MCEstimate> stratum;      // q = 0..n-1
    std::vector<MCEstimate> alternating;  // partial sums, q = 0..n-1
};

inline StrataResult stratum_table(const CRModel& model, std::uint64_t n,
                                  std::uint64_t seed, int workers = 1,
                                  double degenerate_tol = kLeviDegenerateTol) {
    const int q_count = model.n();
    const auto acc = detail::run_strata(model, q_count, n, seed, degenerate_tol, workers);
    const double dn = static_cast<double>(n);
    StrataResult out;
    const bool inconclusive = acc.rejected > n / 100;
    for (int q = 0; q < q_count; ++q) {
        MCEstimate e;
        e.n_samples = n;
        e.seed = seed;
        e.rejected = acc.rejected;
        e.inconclusive = inconclusive;
        const double mean = acc.sum[q] / dn;
        e.value = mean;
        e.stderr_ = std::sqrt(std::max(0.0, acc.sumsq[q] / dn - mean * mean) / dn);
        out.stratum.push_back(e);
    }
    for (int q = 0; q < q_count; ++q) {
        // Per-sample signed value is +-w|det L| on its stratum: strata are
        // disjoint, so the per-sample second moment is the plain sum of the
        // per-stratum second moments.
        double mean = 0.0, m2 = 0.0;
        for (int j = 0; j <= q; ++j) {
            const double sgn = ((q - j) % 2 == 0) ? 1.0 : -1.0;
            mean += sgn * acc.sum[j] / dn;
            m2 += acc.sumsq[j] / dn;
        }
        MCEstimate e;
        e.n_samples = n;
        e.seed = seed;
        e.rejected = acc.rejected;
        e.inconclusive = inconclusive;
        e.value = mean;
        e.stderr_ = std::sqrt(std::max(0.0, m2 - mean * mean) / dn);
        out.alternating.push_back(e);
    }
    return out;
}

/// Unbiased estimate of int_X 1_{X(q)} |det L| dv_X.
inline MCEstimate integrate_stratum(const CRModel& model, int q, std::uint64_t n,
                                    std::uint64_t seed, int workers = 1,
                                    double degenerate_tol = kLeviDegenerateTol) {
    if (q < 0 || q > model.n() - 1)
        throw std::invalid_argument("stratum index out of range");
    return stratum_table(model, n, seed, workers, degenerate_tol).stratum[q];
}

/// Alternating partial sums sum_{j<=q} (-1)^{q-j} int_{X(j)} |det L| dv_X for
/// q = 0..q_max, evaluated on a single shared sample stream.
inline std::vector<MCEstimate> signed_sums(const CRModel& model, int q_max,
                                           std::uint64_t n, std::uint64_t seed,
                                           int workers = 1,
                                           double degenerate_tol = kLeviDegenerateTol) {
    if (q_max > model.n() - 1)
        throw std::invalid_argument("stratum index out of range");
    auto table = stratum_table(model, n, seed, workers, degenerate_tol);
    table.alternating.resize(q_max + 1);
    return table.alternating;
}

}  // namespace crmorse
