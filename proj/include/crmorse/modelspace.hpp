/**
 * @file modelspace.hpp
 * @brief The flat model on C^{n-1} with quadratic weight
 *        Phi_0(w) = sum_j lambda_j |w_j|^2:
 *        extremal harmonic (0,q)-forms, the kernel density at the origin, a
 *        finite-dimensional spectral oracle for it, and the convergence
 *        checks for the rescaled chart operators.
 *
 * Volume convention: dv = 2^{n-1} dx_1 ... dx_{2n-2}, matching the chart
 * normalization used by the manifolds.
 *
 * The extremal (0,q)-form lives on the anti-holomorphic frame of the
 * negative directions and carries the Gaussian e^{2 sum_{lambda_j<0}
 * lambda_j |w_j|^2}; with that exponent it is annihilated by both dbar and
 * its weighted adjoint, and its weighted norm is 1/(2 pi).
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "crmorse/manifold.hpp"
#include "crmorse/quadrature.hpp"

namespace crmorse {

struct ModelParams {
    std::vector<double> lambdas;
    int q = 0;

    ModelParams(std::vector<double> l, int degree) : lambdas(std::move(l)), q(degree) {
        for (double x : lambdas)
            if (std::abs(x) < 1e-9)
                throw std::invalid_argument("model eigenvalues must be nondegenerate");
        if (q < 0 || q > static_cast<int>(lambdas.size()))
            throw std::invalid_argument("degree out of range");
    }

    int dim() const { return static_cast<int>(lambdas.size()); }

    int signature() const {
        int s = 0;
        for (double x : lambdas) s += (x < 0.0) ? 1 : 0;
        return s;
    }

    /// Permutation putting the negative eigenvalues first (ascending), so the
    /// extremal form lives on dwbar_1 ^ ... ^ dwbar_q of the permuted axes.
    std::vector<int> negative_first_permutation() const {
        std::vector<int> p(lambdas.size());
        std::iota(p.begin(), p.end(), 0);
        std::stable_sort(p.begin(), p.end(), [&](int a, int b) {
            const bool na = lambdas[a] < 0, nb = lambdas[b] < 0;
            if (na != nb) return na;
            return lambdas[a] < lambdas[b];
        });
        return p;
    }
};

inline double two_pi() { return 2.0 * kPi; }

/// Squared amplitude at the origin of the normalized extremal form:
/// |u(0)|^2 = |lambda_1 ... lambda_{n-1}| / (2 pi^n).
inline double extremal_center_value(const ModelParams& p) {
    double a2 = 1.0 / two_pi();
    for (double l : p.lambdas) a2 *= std::abs(2.0 * l) / two_pi();
    return a2;
}

struct ExtremalFormValue {
    double coefficient = 0.0;      // coefficient on the permuted frame
    std::vector<int> frame_axes;   // original axes carrying dwbar, in order
};

/// Evaluates the extremal form at w.  Defined only on X(q): the signature of
/// the eigenvalue tuple must equal q.
inline ExtremalFormValue extremal_form_eval(const ModelParams& p, const VecC& w) {
    if (p.signature() != p.q)
        throw std::invalid_argument("extremal form exists only on X(q)");
    if (w.size() != p.dim()) throw std::invalid_argument("dimension mismatch");
    const auto perm = p.negative_first_permutation();
    ExtremalFormValue out;
    out.frame_axes.assign(perm.begin(), perm.begin() + p.q);
    double expo = 0.0;
    for (int j = 0; j < p.q; ++j)
        expo += 2.0 * p.lambdas[perm[j]] * std::norm(w(perm[j]));
    out.coefficient = std::sqrt(extremal_center_value(p)) * std::exp(expo);
    return out;
}

struct ExtremalChecks {
    double norm_value = 0.0;    // quadrature value of int |u|^2 e^{-2 Phi_0} dv
    double center_value = 0.0;  // |u(0)|^2 from the closed form
    double refinement_change = 0.0;
};

/// Tensor Gauss-Hermite verification of the normalization (target 1/(2 pi)).
inline ExtremalChecks extremal_checks(const ModelParams& p, int nodes_per_axis = 64) {
    if (p.signature() != p.q)
        throw std::invalid_argument("extremal form exists only on X(q)");
    auto integrate = [&](int nn) {
        // Per-coordinate: int_C f(w) e^{-2|l||w|^2} 2 dx dy with the Gaussian
        // factored into the rule; the remaining integrand of |u|^2 e^{-2Phi_0}
        // is evaluated pointwise and the Gaussian divided back out.
        std::vector<QuadRule> rules(p.dim());
        for (int j = 0; j < p.dim(); ++j) rules[j] = gauss_hermite(nn);
        double total = 0.0;
        std::vector<int> idx(2 * p.dim(), 0);
        const int per = nn;
        for (;;) {
            VecC w(p.dim());
            double wt = 1.0, gauss = 0.0;
            for (int j = 0; j < p.dim(); ++j) {
                const double s = std::sqrt(2.0 * std::abs(p.lambdas[j]));
                const double x = rules[j].x[idx[2 * j]] / s;
                const double y = rules[j].x[idx[2 * j + 1]] / s;
                w(j) = Complex(x, y);
                wt *= rules[j].w[idx[2 * j]] * rules[j].w[idx[2 * j + 1]] * 2.0 / (s * s);
                gauss += -2.0 * std::abs(p.lambdas[j]) * std::norm(w(j));
            }
            const double coef = extremal_form_eval(p, w).coefficient;
            double phi0 = 0.0;
            for (int j = 0; j < p.dim(); ++j) phi0 += p.lambdas[j] * std::norm(w(j));
            total += wt * coef * coef * std::exp(-2.0 * phi0 - gauss);
            int k = 0;
            while (k < 2 * p.dim() && ++idx[k] == per) idx[k++] = 0;
            if (k == 2 * p.dim()) break;
        }
        return total;
    };
    ExtremalChecks out;
    const double coarse = integrate(nodes_per_axis / 2);
    out.norm_value = integrate(nodes_per_axis);
    out.refinement_change =
        std::abs(out.norm_value - coarse) / std::max(std::abs(out.norm_value), 1e-300);
    if (out.refinement_change > 1e-6)
        throw std::runtime_error("extremal-norm quadrature did not converge");
    out.center_value = extremal_center_value(p);
    return out;
}

/// Kernel density of the model space at the origin:
/// (2 pi)^{-(n-1)} |2 lambda_1 ... 2 lambda_{n-1}| when signature = q, else 0.
inline double model_density(const ModelParams& p) {
    if (p.signature() != p.q) return 0.0;
    double d = 1.0;
    for (double l : p.lambdas) d *= std::abs(2.0 * l) / two_pi();
    return d;
}

// ---------------------------------------------------------------------------
// Brute-force density oracle
// ---------------------------------------------------------------------------

struct BruteForceResult {
    double value = 0.0;
    int null_dim = 0;
    double gram_condition = 0.0;
    bool ill_conditioned = false;
    double smallest_nonnull = 0.0;
};

namespace detail_model {

/// Monomial-with-Gaussian term c w^alpha wbar^beta E(w) on a fixed frame.
struct Term {
    Complex c;
    std::vector<int> a, b;
};

using Block = std::vector<Term>;                 // one anti-holomorphic frame J
using FormExpansion = std::map<std::vector<int>, Block>;  // J (sorted) -> terms

inline int wedge_sign_insert(const std::vector<int>& j_set, int j,
                             std::vector<int>& out) {
    // dwbar_j ^ dwbar^J -> sign * dwbar^{sorted}
    out.clear();
    int pos = 0;
    for (int e : j_set) {
        if (e == j) return 0;
        if (e < j) ++pos;
    }
    out = j_set;
    out.insert(out.begin() + pos, j);
    return (pos % 2 == 0) ? 1 : -1;
}

inline int interior_sign(const std::vector<int>& j_set, int j, std::vector<int>& out) {
    out.clear();
    auto it = std::find(j_set.begin(), j_set.end(), j);
    if (it == j_set.end()) return 0;
    const int pos = static_cast<int>(it - j_set.begin());
    out = j_set;
    out.erase(out.begin() + pos);
    return (pos % 2 == 0) ? 1 : -1;
}

}  // namespace detail_model

/// Assembles the quadratic form |dbar u|^2 + |dbar^* u|^2 and the Gram form
/// on the polynomial-times-Gaussian ansatz of total degree <= max_degree and
/// sums |u_J(0)|^2 over the near-null eigenvectors.  This is the independent
/// oracle for model_density.
inline BruteForceResult density_bruteforce(const ModelParams& p, int max_degree,
                                           int gh_nodes = 64,
                                           double null_threshold = 1e-6) {
    using detail_model::Block;
    using detail_model::FormExpansion;
    using detail_model::Term;
    if (max_degree > 12) throw std::invalid_argument("degree cap is 12");
    const int d = p.dim();

    // Gaussian envelope exponents: mu_j = 2 lambda_j on negative axes.
    std::vector<double> mu(d, 0.0);
    for (int j = 0; j < d; ++j)
        if (p.lambdas[j] < 0.0) mu[j] = 2.0 * p.lambdas[j];

    // Per-coordinate moment tables int w^a wbar^b e^{-2|l||w|^2} 2 dx dy via
    // scaled tensor Gauss-Hermite.
    const int pmax = 2 * max_degree + 4;
    std::vector<Eigen::MatrixXcd> moments(d);
    {
        const QuadRule gh = gauss_hermite(gh_nodes);
        for (int j = 0; j < d; ++j) {
            const double s = std::sqrt(2.0 * std::abs(p.lambdas[j]));
            Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(pmax + 1, pmax + 1);
            for (int ia = 0; ia < gh_nodes; ++ia) {
                for (int ib = 0; ib < gh_nodes; ++ib) {
                    const Complex w(gh.x[ia] / s, gh.x[ib] / s);
                    const double wt = gh.w[ia] * gh.w[ib] * 2.0 / (s * s);
                    Complex wp = 1.0;
                    for (int a = 0; a <= pmax; ++a) {
                        Complex wq = wp;  // w^a * wbar^b accumulated below
                        for (int b = 0; b <= pmax; ++b) {
                            m(a, b) += wt * wq;
                            wq *= std::conj(w);
                        }
                        wp *= w;
                    }
                }
            }
            moments[j] = m;
        }
    }

    // Basis: all (alpha, beta, J).
    std::vector<std::vector<int>> alphas;  // concatenated (a, b) exponents
    {
        std::vector<int> cur(2 * d, 0);
        std::function<void(int, int)> rec = [&](int slot, int budget) {
            if (slot == 2 * d) {
                alphas.push_back(cur);
                return;
            }
            for (int v = 0; v <= budget; ++v) {
                cur[slot] = v;
                rec(slot + 1, budget - v);
            }
            cur[slot] = 0;
        };
        rec(0, max_degree);
    }
    std::vector<std::vector<int>> frames;
    {
        std::vector<int> cur;
        std::function<void(int)> rec = [&](int start) {
            if (static_cast<int>(cur.size()) == p.q) {
                frames.push_back(cur);
                return;
            }
            for (int j = start; j < d; ++j) {
                cur.push_back(j);
                rec(j + 1);
                cur.pop_back();
            }
        };
        rec(0);
    }
    const int nb = static_cast<int>(alphas.size() * frames.size());

    auto basis_element = [&](int i) {
        FormExpansion f;
        const int ia = i % static_cast<int>(alphas.size());
        const int jf = i / static_cast<int>(alphas.size());
        Term t;
        t.c = 1.0;
        t.a.assign(alphas[ia].begin(), alphas[ia].begin() + d);
        t.b.assign(alphas[ia].begin() + d, alphas[ia].end());
        f[frames[jf]].push_back(t);
        return f;
    };

    auto dbar = [&](const FormExpansion& f) {
        FormExpansion out;
        std::vector<int> jj;
        for (const auto& [J, block] : f) {
            for (int j = 0; j < d; ++j) {
                const int sgn = detail_model::wedge_sign_insert(J, j, jj);
                if (sgn == 0) continue;
                for (const Term& t : block) {
                    if (t.b[j] > 0) {
                        Term u = t;
                        u.c *= static_cast<double>(t.b[j]) * static_cast<double>(sgn);
                        u.b[j] -= 1;
                        out[jj].push_back(u);
                    }
                    if (mu[j] != 0.0) {
                        Term u = t;
                        u.c *= mu[j] * static_cast<double>(sgn);
                        u.a[j] += 1;
                        out[jj].push_back(u);
                    }
                }
            }
        }
        return out;
    };

    auto dbar_star = [&](const FormExpansion& f) {
        FormExpansion out;
        std::vector<int> jj;
        for (const auto& [J, block] : f) {
            for (int j : J) {
                const int sgn = detail_model::interior_sign(J, j, jj);
                for (const Term& t : block) {
                    if (t.a[j] > 0) {
                        Term u = t;
                        u.c *= -static_cast<double>(t.a[j]) * static_cast<double>(sgn);
                        u.a[j] -= 1;
                        out[jj].push_back(u);
                    }
                    const double coef = 2.0 * p.lambdas[j] - mu[j];
                    if (coef != 0.0) {
                        Term u = t;
                        u.c *= coef * static_cast<double>(sgn);
                        u.b[j] += 1;
                        out[jj].push_back(u);
                    }
                }
            }
        }
        return out;
    };

    auto pairing = [&](const FormExpansion& f, const FormExpansion& g) {
        Complex acc = 0.0;
        for (const auto& [J, bf] : f) {
            auto it = g.find(J);
            if (it == g.end()) continue;
            for (const Term& s : bf) {
                for (const Term& t : it->second) {
                    Complex v = s.c * std::conj(t.c);
                    for (int j = 0; j < d; ++j)
                        v *= moments[j](s.a[j] + t.b[j], s.b[j] + t.a[j]);
                    acc += v;
                }
            }
        }
        return acc;
    };

    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(nb, nb);
    Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(nb, nb);
    std::vector<FormExpansion> base(nb), dbase(nb), sbase(nb);
    for (int i = 0; i < nb; ++i) {
        base[i] = basis_element(i);
        dbase[i] = dbar(base[i]);
        sbase[i] = dbar_star(base[i]);
    }
    for (int i = 0; i < nb; ++i) {
        for (int j = i; j < nb; ++j) {
            const Complex a = pairing(dbase[i], dbase[j]) + pairing(sbase[i], sbase[j]);
            const Complex b = pairing(base[i], base[j]);
            A(i, j) = a;
            A(j, i) = std::conj(a);
            B(i, j) = b;
            B(j, i) = std::conj(b);
        }
    }

    // Diagonal re-scaling for conditioning, then the generalized eigenproblem.
    Eigen::VectorXd dscale(nb);
    for (int i = 0; i < nb; ++i) dscale(i) = 1.0 / std::sqrt(B(i, i).real());
    Eigen::MatrixXcd As = dscale.asDiagonal() * A * dscale.asDiagonal();
    Eigen::MatrixXcd Bs = dscale.asDiagonal() * B * dscale.asDiagonal();

    BruteForceResult out;
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> bev(Bs);
        const double bmin = bev.eigenvalues().minCoeff();
        const double bmax = bev.eigenvalues().maxCoeff();
        out.gram_condition = bmax / std::max(bmin, 1e-300);
        out.ill_conditioned = !(bmin > 0.0) || out.gram_condition > 1e12;
        if (out.ill_conditioned) return out;
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> ges(As, Bs);

    // |u(0)|^2 sums over the near-null, B-orthonormal eigenvectors; only the
    // constant term of each frame block survives at the origin.
    std::vector<int> const_rows;
    for (int i = 0; i < nb; ++i) {
        const int ia = i % static_cast<int>(alphas.size());
        if (std::all_of(alphas[ia].begin(), alphas[ia].end(),
                        [](int v) { return v == 0; }))
            const_rows.push_back(i);
    }
    double density = 0.0;
    out.smallest_nonnull = std::numeric_limits<double>::infinity();
    for (int k = 0; k < nb; ++k) {
        const double ev = ges.eigenvalues()(k);
        if (ev >= null_threshold) {
            out.smallest_nonnull = std::min(out.smallest_nonnull, ev);
            continue;
        }
        ++out.null_dim;
        const Eigen::VectorXcd v = dscale.asDiagonal() * ges.eigenvectors().col(k);
        for (int r : const_rows) density += std::norm(v(r));
    }
    out.value = density;
    return out;
}

// ---------------------------------------------------------------------------
// Scaling checks on canonical charts
// ---------------------------------------------------------------------------

/// sup over the box D_{log m} of |2m phi(z/sqrt m) - 2 Phi_0(z)|, refined
/// until the sup is stable to 1%.
inline double weight_gap(const BRTChart& chart, long long m) {
    if (m < 3) throw std::invalid_argument("weight_gap requires m >= 3");
    const double r = std::log(static_cast<double>(m));
    if (!(r / std::sqrt(static_cast<double>(m)) <= chart.epsilon))
        throw std::invalid_argument("chart radius exceeded: log m / sqrt m > epsilon");
    const int dim = chart.dim;
    const double sm = std::sqrt(static_cast<double>(m));
    auto sup_on_grid = [&](int nper) {
        double sup = 0.0;
        std::vector<int> idx(2 * dim, 0);
        for (;;) {
            VecC z(dim);
            for (int j = 0; j < dim; ++j) {
                const double x = -r + 2.0 * r * idx[2 * j] / (nper - 1);
                const double y = -r + 2.0 * r * idx[2 * j + 1] / (nper - 1);
                z(j) = Complex(x, y);
            }
            double phi0 = 0.0;
            for (int j = 0; j < dim; ++j) phi0 += chart.lambda[j] * std::norm(z(j));
            const double v =
                std::abs(2.0 * m * chart.phi(z / sm) - 2.0 * phi0);
            sup = std::max(sup, v);
            int k = 0;
            while (k < 2 * dim && ++idx[k] == nper) idx[k++] = 0;
            if (k == 2 * dim) break;
        }
        return sup;
    };
    double sup = sup_on_grid(41);
    for (int nper = 81; nper <= 321; nper = 2 * nper - 1) {
        const double refined = sup_on_grid(nper);
        const double change = std::abs(refined - sup) / std::max(refined, 1e-300);
        sup = refined;
        if (change < 0.01) break;
    }
    return sup;
}

struct OperatorResidual {
    double residual = 0.0;
    bool inconclusive = false;
};

namespace detail_model {

/// High-order central first/second derivative stencils (7 points).
inline void fd_derivatives(const Eigen::MatrixXcd& f, double h, int margin,
                           Eigen::MatrixXcd& fx, Eigen::MatrixXcd& fy,
                           Eigen::MatrixXcd& lap) {
    static const double c1[3] = {3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0};
    static const double c2[4] = {-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0};
    const int nx = static_cast<int>(f.rows()), ny = static_cast<int>(f.cols());
    fx.setZero(nx, ny);
    fy.setZero(nx, ny);
    lap.setZero(nx, ny);
    for (int i = margin; i < nx - margin; ++i) {
        for (int j = margin; j < ny - margin; ++j) {
            Complex dx = 0, dy = 0, dxx = c2[0] * f(i, j), dyy = c2[0] * f(i, j);
            for (int k = 1; k <= 3; ++k) {
                dx += c1[k - 1] * (f(i + k, j) - f(i - k, j));
                dy += c1[k - 1] * (f(i, j + k) - f(i, j - k));
                dxx += c2[k] * (f(i + k, j) + f(i - k, j));
                dyy += c2[k] * (f(i, j + k) + f(i, j - k));
            }
            fx(i, j) = dx / h;
            fy(i, j) = dy / h;
            lap(i, j) = (dxx + dyy) / (h * h);
        }
    }
}

struct ChartOperatorData {
    Eigen::MatrixXcd w;   // weight array (2 m phi(z/sqrt m) or 2 Phi_0)
    Eigen::MatrixXd g;    // metric/density factor on the grid
};

/// Applies the weighted (0,q)-Laplacian with q in {0,1} on a square grid,
/// entirely from finite differences of the weight and density arrays.
inline Eigen::MatrixXcd apply_box(const ChartOperatorData& dat,
                                  const Eigen::MatrixXcd& f, double h, int q,
                                  int margin) {
    const int nx = static_cast<int>(f.rows()), ny = static_cast<int>(f.cols());
    Eigen::MatrixXcd wx, wy, wl;
    fd_derivatives(dat.w, h, margin, wx, wy, wl);
    Eigen::MatrixXcd fx, fy, fl;
    fd_derivatives(f, h, margin, fx, fy, fl);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(nx, ny);
    const Complex ii(0, 1);
    if (q == 0) {
        // (1/G) (-f_{z zbar} + W_z f_zbar)
        for (int i = margin; i < nx - margin; ++i)
            for (int j = margin; j < ny - margin; ++j) {
                const Complex wz = 0.5 * (wx(i, j) - ii * wy(i, j));
                const Complex fzb = 0.5 * (fx(i, j) + ii * fy(i, j));
                out(i, j) = (-0.25 * fl(i, j) + wz * fzb) / dat.g(i, j);
            }
        return out;
    }
    // q = 1: v = (1/G)(W_z f - f_z); box f = d/dzbar v.
    Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(nx, ny);
    for (int i = margin; i < nx - margin; ++i)
        for (int j = margin; j < ny - margin; ++j) {
            const Complex wz = 0.5 * (wx(i, j) - ii * wy(i, j));
            const Complex fz = 0.5 * (fx(i, j) - ii * fy(i, j));
            v(i, j) = (wz * f(i, j) - fz) / dat.g(i, j);
        }
    Eigen::MatrixXcd vx, vy, vl;
    fd_derivatives(v, h, 2 * margin, vx, vy, vl);
    for (int i = 2 * margin; i < nx - 2 * margin; ++i)
        for (int j = 2 * margin; j < ny - 2 * margin; ++j)
            out(i, j) = 0.5 * (vx(i, j) + ii * vy(i, j));
    return out;
}

}  // namespace detail_model

/// Sup-norm of (box_(m) - box_model) applied to a smooth test form supported
/// in D_{log m}; both operators are realized by finite differences from the
/// scaled weight and density.
inline OperatorResidual operator_residual(
    const BRTChart& chart, long long m, int q,
    const std::function<Complex(Complex)>& test_form, int grid = 257) {
    if (chart.dim != 1)
        throw std::invalid_argument("operator check implemented for one-dimensional charts");
    if (q != 0 && q != 1) throw std::invalid_argument("q must be 0 or 1");
    if (m < 3) throw std::invalid_argument("m >= 3 required");
    const double r = std::log(static_cast<double>(m));
    if (!(r / std::sqrt(static_cast<double>(m)) <= chart.epsilon))
        throw std::invalid_argument("chart radius exceeded");
    const double box = std::min(r, 8.0);

    // Support precondition: the test form must vanish on the boundary of the
    // scaled chart domain.
    double boundary = 0.0, peak = 0.0;
    for (int k = 0; k <= 64; ++k) {
        const double s = -r + 2.0 * r * k / 64.0;
        boundary = std::max(boundary, std::abs(test_form(Complex(s, r))));
        boundary = std::max(boundary, std::abs(test_form(Complex(r, s))));
        peak = std::max(peak, std::abs(test_form(Complex(s * 0.3, 0.0))));
    }
    if (boundary > 1e-8 * std::max(peak, 1e-300))
        throw std::invalid_argument("test form not supported inside D_{log m}");

    const double sm = std::sqrt(static_cast<double>(m));
    auto residual_on = [&](int n) {
        const double h = 2.0 * box / (n - 1);
        detail_model::ChartOperatorData scaled, model;
        scaled.w.resize(n, n);
        scaled.g.resize(n, n);
        model.w.resize(n, n);
        model.g = Eigen::MatrixXd::Ones(n, n);
        Eigen::MatrixXcd f(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const Complex z(-box + h * i, -box + h * j);
                VecC zv = VecC::Constant(1, z / sm);
                scaled.w(i, j) = 2.0 * m * chart.phi(zv);
                scaled.g(i, j) = chart.density(zv);
                model.w(i, j) = 2.0 * chart.lambda[0] * std::norm(z);
                f(i, j) = test_form(z);
            }
        }
        const int margin = 3;
        const Eigen::MatrixXcd a = detail_model::apply_box(scaled, f, h, q, margin);
        const Eigen::MatrixXcd b = detail_model::apply_box(model, f, h, q, margin);
        double sup = 0.0;
        const int guard = 2 * margin;
        for (int i = guard; i < n - guard; ++i)
            for (int j = guard; j < n - guard; ++j)
                sup = std::max(sup, std::abs(a(i, j) - b(i, j)));
        return sup;
    };
    OperatorResidual out;
    const double coarse = residual_on(grid / 2 | 1);
    out.residual = residual_on(grid | 1);
    const double change = std::abs(out.residual - coarse);
    out.inconclusive = change > 0.5 * std::max(out.residual, 1e-300);
    return out;
}

}  // namespace crmorse
