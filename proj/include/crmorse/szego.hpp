/**
 * @file szego.hpp
 * @brief Szego kernel functions Pi^0_m from explicit CR bases, and the
 *        Fourier projector onto T-eigenspaces.
 *
 * The m-th component of CR functions is spanned by restricted monomials
 * (hypersurfaces) or twisted polynomial sections (bundles).  For models whose
 * metric is invariant under the full torus the monomials are orthogonal and
 * closed-form norms exist.  The quartic model has only the circle symmetry,
 * so the full Gram matrix is computed by quadrature on the S^1-reduced
 * quotient: every matrix entry is a 2-d integral whose angular dependence is
 * a single Fourier mode, evaluated by an FFT over the invariant angle.
 */
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crmorse/cohomology.hpp"
#include "crmorse/manifold.hpp"
#include "crmorse/quadrature.hpp"

namespace crmorse {

// ---------------------------------------------------------------------------
// Fourier projector
// ---------------------------------------------------------------------------

/// Q_m u with the spectrally exact periodic trapezoidal rule in the action
/// angle, 2(|m|+8) nodes.
inline std::function<Complex(const Point&)> fourier_project(
    const CRModel& model, std::function<Complex(const Point&)> u, long long m) {
    const int nodes = static_cast<int>(2 * (std::llabs(m) + 8));
    return [&model, u = std::move(u), m, nodes](const Point& x) {
        Complex acc = 0.0;
        for (int k = 0; k < nodes; ++k) {
            const double theta = 2.0 * kPi * k / nodes;
            acc += u(model.act(x, theta)) * std::polar(1.0, -static_cast<double>(m) * theta);
        }
        return acc / static_cast<double>(nodes);
    };
}

// ---------------------------------------------------------------------------
// Monomial bases and norms
// ---------------------------------------------------------------------------

/// Monomial exponent tuples spanning the m-th component on a weighted
/// hypersurface: { a in N^n : sum a_j w_j = m }.
inline std::vector<std::vector<int>> monomial_exponents(const std::vector<int>& w,
                                                        long long m) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(w.size(), 0);
    std::function<void(std::size_t, long long)> rec = [&](std::size_t j, long long rest) {
        if (j + 1 == w.size()) {
            if (rest % w[j] == 0) {
                cur[j] = static_cast<int>(rest / w[j]);
                out.push_back(cur);
            }
            return;
        }
        for (long long a = 0; a * w[j] <= rest; ++a) {
            cur[j] = static_cast<int>(a);
            rec(j + 1, rest - a * w[j]);
        }
    };
    if (m >= 0) rec(0, m);
    return out;
}

/// Squared L^2(dv_X) norm of z^a on the round sphere with unit weights:
/// 2 pi^n * prod a_j! / (n-1+|a|)!.
inline double round_monomial_norm2(const std::vector<int>& a) {
    const int n = static_cast<int>(a.size());
    double lg = 0.0;
    long long total = 0;
    for (int aj : a) {
        lg += std::lgamma(static_cast<double>(aj) + 1.0);
        total += aj;
    }
    lg -= std::lgamma(static_cast<double>(n + total));
    double c = 2.0;
    for (int j = 0; j < n; ++j) c *= kPi;
    return c * std::exp(lg);
}

/// Squared norm of z1^a z2^b on the weighted round sphere (n = 2):
/// 2 pi^2 * int_0^1 s^a (1-s)^b / (w1 s + w2 (1-s)) ds.
inline double weighted_round_monomial_norm2(const std::vector<int>& w, int a, int b) {
    if (w.size() != 2) throw std::invalid_argument("weighted norms implemented for n = 2");
    const QuadRule gl = gauss_legendre(std::max(64, a + b + 16), 0.0, 1.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < gl.x.size(); ++i) {
        const double s = gl.x[i];
        acc += gl.w[i] * std::pow(s, a) * std::pow(1.0 - s, b) /
               (w[0] * s + w[1] * (1.0 - s));
    }
    return 2.0 * kPi * kPi * acc;
}

/// Squared norm of the section z^j at level m on the degree-d bundle with the
/// unperturbed metric: 4 pi^2 j! (dm-j)! / (dm+1)!.
inline double bundle_monomial_norm2(int d, long long m, int j) {
    const long long k = static_cast<long long>(d) * m;
    if (j < 0 || j > k) throw std::invalid_argument("section index out of range");
    const double lg = std::lgamma(j + 1.0) + std::lgamma(static_cast<double>(k - j) + 1.0) -
                      std::lgamma(static_cast<double>(k) + 2.0);
    return 4.0 * kPi * kPi * std::exp(lg);
}

struct NormTable {
    long long m = 0;
    std::vector<std::vector<int>> exponents;
    std::vector<double> norm2;
    std::string method;
    double rel_error = 0.0;
};

/// Norms of the monomial basis of H^0_{b,m} for models with torus-invariant
/// metric (round spheres) or the unperturbed circle bundle.
inline NormTable cr_basis_norms(const CRModel& model, long long m) {
    NormTable t;
    t.m = m;
    if (const auto* hs = dynamic_cast<const HypersurfaceModel*>(&model)) {
        if (hs->rho_choice() != RhoChoice::Round)
            throw std::invalid_argument(
                "closed-form norms need a torus-invariant metric; use the Gram machinery");
        t.exponents = monomial_exponents(hs->weights(), m);
        for (const auto& a : t.exponents) {
            if (hs->all_weights_one())
                t.norm2.push_back(round_monomial_norm2(a));
            else
                t.norm2.push_back(weighted_round_monomial_norm2(hs->weights(), a[0], a[1]));
        }
        t.method = hs->all_weights_one() ? "beta" : "radial-quadrature";
        return t;
    }
    if (const auto* cb = dynamic_cast<const CircleBundleModel*>(&model)) {
        if (cb->perturbation() != 0.0)
            throw std::invalid_argument("closed-form bundle norms require c = 0");
        const long long k = static_cast<long long>(cb->degree()) * m;
        for (long long j = 0; j <= k; ++j) {
            t.exponents.push_back({static_cast<int>(j)});
            t.norm2.push_back(bundle_monomial_norm2(cb->degree(), m, static_cast<int>(j)));
        }
        t.method = "beta";
        return t;
    }
    throw std::invalid_argument("no norm table for this model");
}

// ---------------------------------------------------------------------------
// Quotient-quadrature Gram matrices for the quartic hypersurface
// ---------------------------------------------------------------------------

namespace detail_szego {

inline void fft_inplace(std::vector<Complex>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * kPi / static_cast<double>(len);
        const Complex wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            Complex w = 1.0;
            for (std::size_t k = 0; k < len / 2; ++k) {
                const Complex u = a[i + k];
                const Complex v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

inline int next_pow2(int v) {
    int p = 1;
    while (p < v) p <<= 1;
    return p;
}

}  // namespace detail_szego

/// Gram matrices of the restricted monomial basis { z1^{m-2b} z2^b } under
/// L^2(dv_X) on the weights-(1,2) quartic hypersurface, plus kernel values.
///
/// Entries reduce over the free circle direction to 2-d integrals on
/// (alpha, psi), where psi is the invariant angle; the (b,b') entry carries
/// the single Fourier mode e^{i(b-b')psi}, so one FFT per "total degree" row
/// yields a whole anti-diagonal of the table.
class EllipsoidGram {
public:
    explicit EllipsoidGram(const HypersurfaceModel& model) : model_(&model) {
        if (model.rho_choice() != RhoChoice::PaperEllipsoid)
            throw std::invalid_argument("Gram machinery is for the quartic model");
    }

    struct Tables {
        int n_alpha = 0, n_psi = 0;
        std::vector<double> alpha_w;            // GL weight * sin*cos
        std::vector<double> log_t, jdens;       // per node (alpha-major)
        std::vector<double> cos_a, sin_a;       // per alpha
    };

    /// Gram of the m-th basis; cached.  grid_scale > 1 refines (error checks).
    const MatC& gram(long long m, double grid_scale = 1.0) {
        auto key = std::make_pair(m, grid_scale);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        return cache_.emplace(key, compute_gram(m, grid_scale)).first->second;
    }

    /// Monomial value vector at a point of X.
    VecC basis_values(long long m, const Point& x) const {
        const auto expo = monomial_exponents(model_->weights(), m);
        VecC v(expo.size());
        for (std::size_t i = 0; i < expo.size(); ++i)
            v(i) = std::pow(x.z(0), expo[i][0]) * std::pow(x.z(1), expo[i][1]);
        return v;
    }

    /// Pi^0_m(x) = v(x)^H G^{-1} v(x), solved after diagonal rescaling (the
    /// raw Gram spans a wide dynamic range for large m).
    double szego_value(long long m, const Point& x, double grid_scale = 1.0) {
        const MatC& g = gram(m, grid_scale);
        if (g.rows() == 0) return 0.0;
        const int dim = static_cast<int>(g.rows());
        VecR d(dim);
        for (int i = 0; i < dim; ++i) d(i) = 1.0 / std::sqrt(g(i, i).real());
        const MatC gs = d.asDiagonal() * g * d.asDiagonal();
        VecC v = basis_values(m, x);
        for (int i = 0; i < dim; ++i) v(i) *= d(i);
        const Eigen::LDLT<MatC> ldlt(gs);
        return std::max(0.0, v.dot(ldlt.solve(v)).real());
    }

    /// Numerical rank with singular values below rel_tol * max treated as 0.
    int gram_rank(long long m, double rel_tol = 1e-8) {
        const MatC& g = gram(m);
        if (g.rows() == 0) return 0;
        Eigen::JacobiSVD<MatC> svd(g);
        const double smax = svd.singularValues()(0);
        int r = 0;
        for (int i = 0; i < svd.singularValues().size(); ++i)
            if (svd.singularValues()(i) > rel_tol * smax) ++r;
        return r;
    }

private:
    MatC compute_gram(long long m, double grid_scale) {
        const int dim = static_cast<int>(m / 2) + 1;
        if (m < 0) return MatC::Zero(0, 0);
        const int n_alpha =
            static_cast<int>(grid_scale * (static_cast<double>(m) + 64.0));
        const int n_psi = detail_szego::next_pow2(
            static_cast<int>(grid_scale * (static_cast<double>(m) + 160.0)));
        ensure_tables(n_alpha, n_psi);
        const Tables& tb = tables_;

        // C[s][f]: s = b + b' (row of t^{2m-s} cos^{2m-2s} sin^{s}), f = b - b'.
        const int smax = 2 * (dim - 1);
        MatC c = MatC::Zero(smax + 1, dim);
        std::vector<Complex> row(n_psi);
        std::vector<double> vals(n_psi), ratio(n_psi);
        for (int ia = 0; ia < n_alpha; ++ia) {
            const double ca = tb.cos_a[ia], sa = tb.sin_a[ia];
            const double wa = tb.alpha_w[ia];
            const double lc = std::log(ca), ls = std::log(sa);
            // s = 0 row: J * t^{2m} cos^{2m}; then multiply by sin/(t cos^2).
            for (int ip = 0; ip < n_psi; ++ip) {
                const std::size_t k = static_cast<std::size_t>(ia) * n_psi + ip;
                vals[ip] = tb.jdens[k] *
                           std::exp(2.0 * m * (tb.log_t[k] + lc));
                ratio[ip] = std::exp(ls - tb.log_t[k] - 2.0 * lc);
            }
            for (int s = 0; s <= smax; ++s) {
                for (int ip = 0; ip < n_psi; ++ip) row[ip] = vals[ip];
                detail_szego::fft_inplace(row);
                const double norm = wa * 2.0 * kPi / n_psi;
                const int fmax = std::min({s, smax - s, dim - 1});
                for (int f = 0; f <= fmax; ++f)
                    c(s, f) += norm * row[(n_psi - f) % n_psi];
                if (s < smax)
                    for (int ip = 0; ip < n_psi; ++ip) vals[ip] *= ratio[ip];
            }
        }

        MatC g(dim, dim);
        for (int b = 0; b < dim; ++b) {
            for (int bp = 0; bp <= b; ++bp) {
                const Complex e = 2.0 * kPi * c(b + bp, b - bp);
                g(b, bp) = e;
                g(bp, b) = std::conj(e);
            }
        }
        return g;
    }

    void ensure_tables(int n_alpha, int n_psi) {
        if (tables_.n_alpha == n_alpha && tables_.n_psi == n_psi) return;
        Tables tb;
        tb.n_alpha = n_alpha;
        tb.n_psi = n_psi;
        const QuadRule gl = gauss_legendre(n_alpha, 0.0, 0.5 * kPi);
        tb.alpha_w.resize(n_alpha);
        tb.cos_a.resize(n_alpha);
        tb.sin_a.resize(n_alpha);
        tb.log_t.resize(static_cast<std::size_t>(n_alpha) * n_psi);
        tb.jdens.resize(static_cast<std::size_t>(n_alpha) * n_psi);
        for (int ia = 0; ia < n_alpha; ++ia) {
            const double alpha = gl.x[ia];
            const double ca = std::cos(alpha), sa = std::sin(alpha);
            tb.cos_a[ia] = ca;
            tb.sin_a[ia] = sa;
            tb.alpha_w[ia] = gl.w[ia] * ca * sa;
            for (int ip = 0; ip < n_psi; ++ip) {
                const double psi = 2.0 * kPi * ip / n_psi;
                VecC u(2);
                u(0) = ca;
                u(1) = std::polar(sa, psi);
                const double t = radial_root(u);
                const VecC x = t * u;
                const std::size_t k = static_cast<std::size_t>(ia) * n_psi + ip;
                tb.log_t[k] = std::log(t);
                tb.jdens[k] = model_->surface_density(u, x, t);
            }
        }
        tables_ = std::move(tb);
    }

    double radial_root(const VecC& u) const {
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            (model_->rho(mid * u) < 0.0 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

    const HypersurfaceModel* model_;
    Tables tables_;
    std::map<std::pair<long long, double>, MatC> cache_;
};

// ---------------------------------------------------------------------------
// Kernel profiles
// ---------------------------------------------------------------------------

struct SzegoProfile {
    std::string model_id;
    std::vector<long long> m_list;
    std::vector<Point> probes;
    std::vector<std::string> probe_ids;
    // values[i][p] = m^{-(n-1)} Pi^0_m(probe p); error bars alongside.
    std::vector<std::vector<double>> values;
    std::vector<std::vector<double>> errors;
    std::vector<NormTable> basis_norms;  // when a norm table exists
};

/// Default probes: one regular point with generic coordinates plus every
/// exceptional-orbit representative of the model.
inline std::pair<std::vector<Point>, std::vector<std::string>> default_probes(
    const CRModel& model) {
    std::vector<Point> pts;
    std::vector<std::string> ids;
    if (const auto* hs = dynamic_cast<const HypersurfaceModel*>(&model)) {
        const int n = hs->n();
        VecC dir(n);
        for (int j = 0; j < n; ++j)
            dir(j) = Complex(0.6 + 0.1 * j, 0.31 + 0.07 * j);
        dir.normalize();
        double t = 1.0;
        if (hs->rho_choice() == RhoChoice::PaperEllipsoid) {
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                (hs->rho(mid * dir) < 0.0 ? lo : hi) = mid;
            }
            t = 0.5 * (lo + hi);
        }
        Point reg;
        reg.z = t * dir;
        pts.push_back(reg);
        ids.push_back("regular");
        if (n == 2 && !hs->all_weights_one()) {
            for (int j0 = 0; j0 < n; ++j0) {
                Point p;
                p.z = VecC::Zero(n);
                p.z(j0) = hs->axis_value(j0);
                if (hs->orbit_period(p) > 1) {
                    pts.push_back(p);
                    ids.push_back("exceptional-axis" + std::to_string(j0));
                }
            }
        }
        return {pts, ids};
    }
    Point p;
    p.chart = 0;
    p.z = VecC::Constant(1, Complex(0.7, 0.3));
    p.theta = 0.4;
    pts.push_back(p);
    ids.push_back("regular");
    return {pts, ids};
}

/// Kernel value from a diagonal norm table, in log-space for large m.
inline double hypersurface_szego_value(const HypersurfaceModel& hs,
                                       const NormTable& norms, const Point& x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < norms.exponents.size(); ++i) {
        double lg = -std::log(norms.norm2[i]);
        bool zero = false;
        for (std::size_t j = 0; j < norms.exponents[i].size(); ++j) {
            const int a = norms.exponents[i][j];
            if (a == 0) continue;
            const double mod = std::abs(x.z(j));
            if (mod == 0.0) {
                zero = true;
                break;
            }
            lg += 2.0 * a * std::log(mod);
        }
        if (!zero) acc += std::exp(lg);
    }
    return acc;
}

inline SzegoProfile szego_profile(const CRModel& model,
                                  const std::vector<long long>& m_list,
                                  const std::vector<Point>& probes,
                                  const std::vector<std::string>& probe_ids,
                                  bool with_error_bars = false) {
    SzegoProfile out;
    out.model_id = model.kind();
    out.m_list = m_list;
    out.probes = probes;
    out.probe_ids = probe_ids;
    const int n = model.n();
    const double expo = n - 1;

    const auto* hs = dynamic_cast<const HypersurfaceModel*>(&model);
    const auto* cb = dynamic_cast<const CircleBundleModel*>(&model);
    std::unique_ptr<EllipsoidGram> eg;
    if (hs && hs->rho_choice() == RhoChoice::PaperEllipsoid)
        eg = std::make_unique<EllipsoidGram>(*hs);

    for (long long m : m_list) {
        std::vector<double> vals, errs;
        const double scale = std::pow(static_cast<double>(std::max<long long>(m, 1)), -expo);
        if (eg) {
            for (const Point& p : probes) {
                const double v = eg->szego_value(m, p);
                double e = 0.0;
                if (with_error_bars)
                    e = std::abs(v - eg->szego_value(m, p, 1.5));
                vals.push_back(scale * v);
                errs.push_back(scale * e);
            }
        } else if (hs) {
            const NormTable t = cr_basis_norms(model, m);
            out.basis_norms.push_back(t);
            for (const Point& p : probes) {
                vals.push_back(scale * hypersurface_szego_value(*hs, t, p));
                errs.push_back(0.0);
            }
        } else if (cb) {
            const NormTable t = cr_basis_norms(model, m);
            out.basis_norms.push_back(t);
            for (const Point& p : probes) {
                const Complex z = p.z(0);
                const double phi = cb->weight(p.chart, z);
                double acc = 0.0;
                for (std::size_t j = 0; j < t.norm2.size(); ++j) {
                    const int jj = t.exponents[j][0];
                    double lg = -std::log(t.norm2[j]) - 2.0 * m * phi;
                    if (jj > 0) {
                        const double mod = std::abs(z);
                        if (mod == 0.0) continue;
                        lg += 2.0 * jj * std::log(mod);
                    }
                    acc += std::exp(lg);
                }
                vals.push_back(scale * acc);
                errs.push_back(0.0);
            }
        } else {
            throw std::invalid_argument("no kernel machinery for this model");
        }
        out.values.push_back(std::move(vals));
        out.errors.push_back(std::move(errs));
    }
    return out;
}

}  // namespace crmorse
