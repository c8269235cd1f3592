/**
 * @file levi.hpp
 * @brief Levi form spectrum, signature strata X(q), and the |det L| integrand.
 *
 * The Levi form is evaluated pointwise from the characteristic form: with
 * omega0 annihilating the CR plane and <omega0, T> = -1, the Hermitian matrix
 * in an orthonormal T^{1,0} frame satisfies 2i L(U, Vbar) = <[U, Vbar], omega0>
 * = -d omega0(U, Vbar).  The models assemble this matrix algebraically; here
 * it is validated (Hermitian symmetry) and reduced to its spectrum.
 */
#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "crmorse/manifold.hpp"

namespace crmorse {

struct LeviSpectrum {
    std::vector<double> eigenvalues;  // sorted ascending
    double det = 1.0;
    int signature = 0;                // number of strictly negative eigenvalues
    bool degenerate = false;          // any |lambda_j| < tolerance
};

inline constexpr double kLeviDegenerateTol = 1e-9;

/// Outcome of classify(): a stratum index or Degenerate.
struct StratumClass {
    bool degenerate = false;
    int q = -1;
};

inline LeviSpectrum levi_spectrum(const CRModel& model, const Point& x,
                                  double degenerate_tol = kLeviDegenerateTol) {
    if (model.on_surface_residual(x) > 1e-10)
        throw std::invalid_argument("point not on X");
    const MatC m = model.levi_matrix(x);
    const double asym = (m - m.adjoint()).norm();
    if (asym > 1e-10 * std::max(1.0, m.norm()))
        throw std::runtime_error("Levi matrix failed the Hermitian symmetry check");
    Eigen::SelfAdjointEigenSolver<MatC> es(0.5 * (m + m.adjoint()));
    LeviSpectrum s;
    const int d = static_cast<int>(m.rows());
    s.eigenvalues.resize(d);
    for (int j = 0; j < d; ++j) {
        const double ev = es.eigenvalues()(j);
        s.eigenvalues[j] = ev;
        s.det *= ev;
        if (ev < -degenerate_tol) ++s.signature;
        if (std::abs(ev) < degenerate_tol) s.degenerate = true;
    }
    return s;
}

inline StratumClass classify(const LeviSpectrum& s, double tol = kLeviDegenerateTol) {
    StratumClass c;
    int q = 0;
    for (double ev : s.eigenvalues) {
        if (std::abs(ev) < tol) {
            c.degenerate = true;
            return c;
        }
        if (ev < 0.0) ++q;
    }
    c.q = q;
    return c;
}

/// |det L|; the indicator 1_{X(q)} is applied by the caller.
inline double morse_integrand(const LeviSpectrum& s) { return std::abs(s.det); }

}  // namespace crmorse
