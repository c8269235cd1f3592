/**
 * @file morse.hpp
 * @brief Assembles exact dimensions and stratum integrals into verdicts for
 *        the growth inequalities and identities checked by this laboratory.
 *
 * The inequalities are asymptotic: dimensions dim_m are compared through the
 * fitted leading coefficient of dim_m = c m^{n-1} + lower order (top half of
 * the m-range), against curvature integrals with Monte-Carlo error bars.
 * Every verdict carries an explicit budget (3 sigma of the integral plus the
 * fit's standard error); an inconclusive estimate can only produce an
 * inconclusive verdict, never a silent pass.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crmorse/cohomology.hpp"
#include "crmorse/integrate.hpp"
#include "crmorse/levi.hpp"
#include "crmorse/manifold.hpp"

namespace crmorse {

struct FitResult {
    double c = 0.0;         // leading coefficient of m^{n-1}
    double c_stderr = 0.0;  // least-squares standard error of c
    double residual = 0.0;  // RMS residual of the fit
};

/// Least squares for dim_m = c m^{n-1} + (affine lower order), n >= 2.
inline FitResult fit_leading(const std::vector<long long>& ms,
                             const std::vector<double>& dims, int n) {
    const int rows = static_cast<int>(ms.size());
    if (rows < 8) throw std::invalid_argument("need at least 8 data points");
    const int cols = n;  // powers m^{n-1}, ..., m, 1
    MatR a(rows, cols);
    VecR y(rows);
    for (int i = 0; i < rows; ++i) {
        const double am = std::abs(static_cast<double>(ms[i]));
        double p = 1.0;
        for (int j = cols - 1; j >= 0; --j) {
            a(i, j) = p;
            p *= am;
        }
        y(i) = dims[i];
    }
    const Eigen::ColPivHouseholderQR<MatR> qr(a);
    if (qr.rank() < cols) throw std::runtime_error("rank-deficient fit design");
    const VecR coef = qr.solve(y);
    const VecR r = y - a * coef;
    FitResult out;
    out.c = coef(0);
    out.residual = std::sqrt(r.squaredNorm() / rows);
    const MatR gram_inv = (a.transpose() * a).inverse();
    const double s2 = r.squaredNorm() / std::max(1, rows - cols);
    out.c_stderr = std::sqrt(std::max(0.0, s2 * gram_inv(0, 0)));
    return out;
}

enum class VerdictStatus { Pass, Fail, Inconclusive };

inline const char* to_string(VerdictStatus s) {
    switch (s) {
        case VerdictStatus::Pass: return "pass";
        case VerdictStatus::Fail: return "fail";
        default: return "inconclusive";
    }
}

struct Check {
    std::string name;
    std::string statement;  // the inequality or identity being tested
    double lhs = 0.0;
    double rhs = 0.0;
    double budget = 0.0;
    double slack = 0.0;     // rhs + budget - lhs (>= 0 on pass)
    VerdictStatus status = VerdictStatus::Inconclusive;
};

struct MorseReport {
    std::string model_descriptor;
    long long m_max = 0;
    std::uint64_t n_samples = 0;
    std::uint64_t seed = 0;
    int workers = 1;
    std::vector<MCEstimate> stratum_integrals;     // q = 0..n-1
    std::vector<MCEstimate> alternating_integrals; // partial sums
    std::vector<std::pair<int, FitResult>> fits;   // per degree q
    std::vector<Check> checks;

    VerdictStatus overall() const {
        VerdictStatus s = VerdictStatus::Pass;
        for (const auto& c : checks) {
            if (c.status == VerdictStatus::Fail) return VerdictStatus::Fail;
            if (c.status == VerdictStatus::Inconclusive) s = VerdictStatus::Inconclusive;
        }
        return s;
    }
};

namespace detail_morse {

inline Check ineq_check(std::string name, std::string statement, double lhs,
                        double rhs, double budget, bool inconclusive) {
    Check c;
    c.name = std::move(name);
    c.statement = std::move(statement);
    c.lhs = lhs;
    c.rhs = rhs;
    c.budget = budget;
    c.slack = rhs + budget - lhs;
    c.status = inconclusive ? VerdictStatus::Inconclusive
                            : (c.slack >= 0.0 ? VerdictStatus::Pass : VerdictStatus::Fail);
    return c;
}

inline Check eq_check(std::string name, std::string statement, double lhs,
                      double rhs, double budget, bool inconclusive) {
    Check c;
    c.name = std::move(name);
    c.statement = std::move(statement);
    c.lhs = lhs;
    c.rhs = rhs;
    c.budget = budget;
    c.slack = budget - std::abs(lhs - rhs);
    c.status = inconclusive ? VerdictStatus::Inconclusive
                            : (c.slack >= 0.0 ? VerdictStatus::Pass : VerdictStatus::Fail);
    return c;
}

}  // namespace detail_morse

/// Full verdict report for one model.
///
/// Checks emitted (when the model supports the needed dimensions):
///   weak_q       fitted c_q <= (2 pi^n)^{-1} int_{X(q)} |det L| + budget
///   strong_q     alternating dim sums vs alternating integrals
///   riemann_roch fitted Euler slope = alternating integral (bundles)
///   gr           c_0 > 0 on pseudoconvex models; higher c_q consistent with 0
///   x_le_1       c_0 >= (2 pi^n)^{-1} (I_0 - I_1) - budget (mixed curvature)
///   negative_m   dim H^q_{b,m}, m -> -infinity, against X(n-1-q)
inline MorseReport build_report(const CRModel& model, long long m_max,
                                std::uint64_t n_samples, std::uint64_t seed,
                                int workers = 1) {
    using detail_morse::eq_check;
    using detail_morse::ineq_check;
    MorseReport rep;
    rep.model_descriptor = model.descriptor();
    rep.m_max = m_max;
    rep.n_samples = n_samples;
    rep.seed = seed;
    rep.workers = workers;

    const int n = model.n();
    const double two_pi_n = 2.0 * std::pow(kPi, n);

    const StrataResult strata = stratum_table(model, n_samples, seed, workers);
    rep.stratum_integrals = strata.stratum;
    rep.alternating_integrals = strata.alternating;
    const bool mc_inconclusive = strata.stratum[0].inconclusive;

    // Dimensions and fits.
    const bool is_bundle = dynamic_cast<const CircleBundleModel*>(&model) != nullptr;
    std::vector<int> q_range = is_bundle ? std::vector<int>{0, 1} : std::vector<int>{0};
    std::vector<long long> ms;
    for (long long m = 1; m <= m_max; ++m) ms.push_back(m);
    const CohomologyTable dims = dims_table(model, ms, q_range);

    std::vector<long long> top_ms(ms.begin() + ms.size() / 2, ms.end());
    std::vector<FitResult> fits(q_range.size());
    for (std::size_t qi = 0; qi < q_range.size(); ++qi) {
        std::vector<double> dd;
        for (long long m : top_ms)
            dd.push_back(static_cast<double>(*dims.dim(q_range[qi], m)));
        fits[qi] = fit_leading(top_ms, dd, n);
        rep.fits.emplace_back(q_range[qi], fits[qi]);
    }

    auto integral_budget = [&](const MCEstimate& e) {
        return 3.0 * e.stderr_ / two_pi_n;
    };

    // Weak inequalities.
    for (std::size_t qi = 0; qi < q_range.size(); ++qi) {
        const int q = q_range[qi];
        const MCEstimate& iq = strata.stratum[q];
        rep.checks.push_back(ineq_check(
            "weak_q" + std::to_string(q),
            "fitted c_q <= (2 pi^n)^{-1} int_{X(q)} |det L| dv + budget",
            fits[qi].c, iq.value / two_pi_n,
            integral_budget(iq) + fits[qi].c_stderr, mc_inconclusive));
    }

    // Strong inequalities: alternating dimension sums against alternating
    // integral sums, fitted the same way.
    for (std::size_t qi = 0; qi < q_range.size(); ++qi) {
        const int q = q_range[qi];
        std::vector<double> alt;
        for (long long m : top_ms) {
            double s = 0.0;
            for (int j = 0; j <= q; ++j) {
                const double sgn = ((q - j) % 2 == 0) ? 1.0 : -1.0;
                s += sgn * static_cast<double>(*dims.dim(j, m));
            }
            alt.push_back(s);
        }
        const FitResult f = fit_leading(top_ms, alt, n);
        const MCEstimate& ia = strata.alternating[q];
        rep.checks.push_back(ineq_check(
            "strong_q" + std::to_string(q),
            "fitted alternating dim sum <= (2 pi^n)^{-1} alternating integral + budget",
            f.c, ia.value / two_pi_n, integral_budget(ia) + f.c_stderr,
            mc_inconclusive));
    }

    // Asymptotic Euler characteristic (bundles: both degrees available).
    if (is_bundle) {
        std::vector<double> euler;
        for (long long m : top_ms)
            euler.push_back(static_cast<double>(*dims.dim(0, m)) -
                            static_cast<double>(*dims.dim(1, m)));
        const FitResult f = fit_leading(top_ms, euler, n);
        const MCEstimate& ia = strata.alternating[n - 1];
        rep.checks.push_back(eq_check(
            "riemann_roch",
            "fitted Euler slope = (2 pi^n)^{-1} sum_j (-1)^j int_{X(j)} |det L| dv",
            f.c, ia.value / two_pi_n, integral_budget(ia) + f.c_stderr,
            mc_inconclusive));
    }

    // Pseudoconvexity classification from the sampled Levi spectra.
    bool weakly_pc = true, strongly_pc_somewhere = false, mixed = false;
    {
        const std::uint64_t probes = std::min<std::uint64_t>(n_samples, 2000);
        for (std::uint64_t i = 0; i < probes; ++i) {
            const SampleResult s = model.sample_point(seed ^ 0x5eedb00cULL, i);
            const LeviSpectrum spec = levi_spectrum(model, s.x);
            if (spec.eigenvalues.front() < -kLeviDegenerateTol) weakly_pc = false;
            if (spec.eigenvalues.front() > kLeviDegenerateTol) strongly_pc_somewhere = true;
        }
        mixed = !weakly_pc && strongly_pc_somewhere;
    }

    if (weakly_pc && strongly_pc_somewhere) {
        const double budget = fits[0].c_stderr;
        rep.checks.push_back(ineq_check(
            "gr_positive_growth", "c_0 > 0 for pseudoconvex X, strongly pseudoconvex somewhere",
            budget, fits[0].c, 0.0, false));
        if (is_bundle) {
            const FitResult& f1 = fits[1];
            rep.checks.push_back(ineq_check(
                "gr_higher_vanishing", "|c_q| <= 2 fit residual + budget for q >= 1",
                std::abs(f1.c), 2.0 * f1.residual, 3.0 * f1.c_stderr, false));
        }
    }

    if (is_bundle && mixed) {
        const MCEstimate& ia = strata.alternating[1];
        rep.checks.push_back(ineq_check(
            "x_le_1",
            "c_0 >= (2 pi^n)^{-1} (int_{X(0)} - int_{X(1)}) |det L| dv - budget",
            ia.value / two_pi_n, fits[0].c,
            integral_budget(ia) + fits[0].c_stderr, mc_inconclusive));
    }

    // Negative Fourier index: dims against the complementary stratum.
    {
        std::vector<long long> neg_ms;
        for (long long m = -m_max; m <= -std::max<long long>(2, m_max / 10); ++m)
            neg_ms.push_back(m);
        const CohomologyTable neg = dims_table(model, neg_ms, q_range);
        std::vector<long long> top(neg_ms.begin(), neg_ms.begin() + neg_ms.size() / 2);
        for (std::size_t qi = 0; qi < q_range.size(); ++qi) {
            const int q = q_range[qi];
            std::vector<double> dd;
            for (long long m : top) dd.push_back(static_cast<double>(*neg.dim(q, m)));
            const FitResult f = fit_leading(top, dd, n);
            const int comp = n - 1 - q;
            const MCEstimate& ic = strata.stratum[comp];
            rep.checks.push_back(ineq_check(
                "negative_m_q" + std::to_string(q),
                "fitted c of dim H^q_{b,m}, m -> -inf, <= (2 pi^n)^{-1} int_{X(n-1-q)} + budget",
                f.c, ic.value / two_pi_n, integral_budget(ic) + f.c_stderr,
                mc_inconclusive));
        }
    }

    return rep;
}

}  // namespace crmorse
