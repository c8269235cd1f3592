/**
 * @file quadrature.hpp
 * @brief Gauss rules via Golub-Welsch (symmetric tridiagonal eigenproblem).
 */
#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace crmorse {

struct QuadRule {
    std::vector<double> x;
    std::vector<double> w;
};

namespace detail {

inline QuadRule golub_welsch(const Eigen::VectorXd& offdiag, double mu0) {
    const int n = static_cast<int>(offdiag.size()) + 1;
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k + 1 < n; ++k) {
        j(k, k + 1) = offdiag(k);
        j(k + 1, k) = offdiag(k);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    QuadRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int k = 0; k < n; ++k) {
        r.x[k] = es.eigenvalues()(k);
        const double v0 = es.eigenvectors()(0, k);
        r.w[k] = mu0 * v0 * v0;
    }
    return r;
}

}  // namespace detail

/// Gauss-Legendre on [-1, 1].
inline QuadRule gauss_legendre(int n) {
    Eigen::VectorXd b(n - 1);
    for (int k = 1; k < n; ++k)
        b(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
    return detail::golub_welsch(b, 2.0);
}

/// Gauss-Legendre mapped to [a, b].
inline QuadRule gauss_legendre(int n, double a, double b) {
    QuadRule r = gauss_legendre(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int k = 0; k < n; ++k) {
        r.x[k] = mid + half * r.x[k];
        r.w[k] *= half;
    }
    return r;
}

/// Gauss-Hermite with weight exp(-x^2) on the line.
inline QuadRule gauss_hermite(int n) {
    Eigen::VectorXd b(n - 1);
    for (int k = 1; k < n; ++k) b(k - 1) = std::sqrt(0.5 * k);
    return detail::golub_welsch(b, std::sqrt(3.141592653589793238462643383279502884));
}

}  // namespace crmorse
