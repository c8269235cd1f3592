/**
 * @file manifold.hpp
 * @brief Model CR manifolds with a transversal locally free circle action.
 *
 * Three concrete families are provided behind one sampling/geometry contract:
 *   - weighted round spheres  X = { |z|^2 = 1 }  with action
 *     e^{i t} o z = (e^{i w_1 t} z_1, ..., e^{i w_n t} z_n),
 *   - the quartic hypersurface X = { |z1|^2 + |z1^2 + z2|^2 + |z2|^2 = 1 }
 *     with weights (1,2), which is not a circle bundle,
 *   - circle bundles over the projective line with a Fubini-Study power
 *     metric weight plus an optional smooth perturbation.
 *
 * Metric convention (fixed throughout): the CR directions carry the ambient
 * Euclidean metric (hypersurfaces) or the Fubini-Study base metric with
 * total area 2*pi (bundles); the action generator T is declared unit and
 * orthogonal to the CR plane.  The characteristic form omega0 annihilates
 * the CR plane and pairs to -1 with T.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crmorse/quadrature.hpp"
#include "crmorse/rng.hpp"

namespace crmorse {

using Complex = std::complex<double>;
using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;
using VecR = Eigen::VectorXd;
using MatR = Eigen::MatrixXd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Euclidean inner product of real vectors in complex representation:
/// a encodes v = sum_j (a_j d/dz_j + conj(a_j) d/dzbar_j).
inline double real_dot(const VecC& a, const VecC& b) {
    return a.dot(b).real();  // Eigen dot conjugates the first argument
}

/// A point of a model manifold.
/// Hypersurfaces: z holds the n ambient coordinates.
/// Circle bundles: chart in {0,1}, z holds the single affine coordinate,
/// theta the fiber angle.
struct Point {
    VecC z;
    int chart = 0;
    double theta = 0.0;
};

/// Pointwise contact data: action generator, CR frame, characteristic form.
///
/// Vectors carry an extra theta-slot so the same container serves ambient
/// (hypersurface) and chart (bundle) representations; the slot is zero for
/// hypersurfaces.  omega0 is stored as (c, c_theta) with pairings
///   <omega0, real v> = 2 Re(c . a) + c_theta * a_theta,
///   <omega0, U>      = c^T U + c_theta * U_theta  for U in T^{1,0}.
struct ContactFrame {
    Point x;
    VecC t;                 // complex representation of the real generator T
    double t_theta = 0.0;   // d/dtheta component (bundles)
    MatC cr_basis;          // columns: T^{1,0} basis, Euclid/chart orthonormal
    VecC cr_basis_theta;    // theta components of the basis columns
    VecC omega0;
    double omega0_theta = 0.0;

    double omega0_on_T() const {
        return 2.0 * (omega0.transpose() * t).value().real() + omega0_theta * t_theta;
    }
    Complex omega0_on_basis(int a) const {
        return (omega0.transpose() * cr_basis.col(a)).value() +
               omega0_theta * cr_basis_theta(a);
    }
};

/// Canonical local chart data: potential phi with phi(0)=0, dphi(0)=0 and
/// complex Hessian diag(lambda) at the anchor, plus the volume density
/// lambda(z) normalized to 1 at the anchor.
struct BRTChart {
    Point anchor;
    int dim = 1;                      // n-1
    double epsilon = 0.0;             // per-coordinate chart radius
    double delta = 0.0;               // theta half-width (pi / k nominal)
    std::vector<double> lambda;       // Levi eigenvalues at the anchor
    std::function<double(const VecC&)> phi;
    std::function<double(const VecC&)> density;
};

/// Synthetic chart phi = sum lambda_j |z_j|^2 with unit density.
inline BRTChart make_quadratic_chart(const std::vector<double>& lambdas) {
    BRTChart c;
    c.dim = static_cast<int>(lambdas.size());
    c.epsilon = std::numeric_limits<double>::infinity();
    c.delta = kPi;
    c.lambda = lambdas;
    c.anchor.z = VecC::Zero(c.dim);
    std::vector<double> lam = lambdas;
    c.phi = [lam](const VecC& z) {
        double s = 0.0;
        for (int j = 0; j < static_cast<int>(lam.size()); ++j) s += lam[j] * std::norm(z(j));
        return s;
    };
    c.density = [](const VecC&) { return 1.0; };
    return c;
}

struct SampleResult {
    Point x;
    double weight = 0.0;
    std::uint64_t rejected = 0;
};

/// Abstract model contract.
class CRModel {
public:
    virtual ~CRModel() = default;

    virtual int n() const = 0;  // real dim X = 2n-1
    virtual std::string kind() const = 0;

    /// Key-value text block describing the model (one "key=value" per line).
    virtual std::string descriptor() const = 0;

    virtual Point act(const Point& x, double theta) const = 0;
    virtual SampleResult sample_point(std::uint64_t seed, std::uint64_t index) const = 0;
    virtual ContactFrame contact_frame(const Point& x) const = 0;
    virtual int orbit_period(const Point& x) const = 0;

    /// Levi form in an orthonormal T^{1,0} frame under the model's T-rigid
    /// metric; Hermitian (n-1)x(n-1).
    virtual MatC levi_matrix(const Point& x) const = 0;

    /// Relative residual of the defining constraint at x.
    virtual double on_surface_residual(const Point& x) const = 0;

    virtual std::vector<Point> designated_anchors() const = 0;
    virtual BRTChart brt_chart(const Point& anchor) const = 0;
};

// ---------------------------------------------------------------------------
// Weighted hypersurfaces in C^n
// ---------------------------------------------------------------------------

enum class RhoChoice { Round, PaperEllipsoid };

namespace detail {

inline long long gcd_of(const std::vector<int>& w) {
    long long g = 0;
    for (int x : w) g = std::gcd(g, static_cast<long long>(x));
    return g;
}

/// Orthonormal basis of the orthogonal complement of v in C^n.
inline MatC unitary_complement(const VecC& v) {
    const int n = static_cast<int>(v.size());
    if (n == 2) {
        MatC b(2, 1);
        const double s = v.norm();
        b(0, 0) = -std::conj(v(1)) / s;
        b(1, 0) = std::conj(v(0)) / s;
        return b;
    }
    Eigen::JacobiSVD<MatC> svd(v.transpose(), Eigen::ComputeFullV);
    return svd.matrixV().rightCols(n - 1);
}

/// Orthonormal basis of u^perp in R^{2n}, returned in complex representation.
/// u must be unit (complex representation of a real vector).
inline std::vector<VecC> real_tangent_basis(const VecC& u) {
    const int n = static_cast<int>(u.size());
    const int dim = 2 * n;
    VecR ur(dim);
    for (int j = 0; j < n; ++j) {
        ur(2 * j) = u(j).real();
        ur(2 * j + 1) = u(j).imag();
    }
    // Householder vector mapping e_k -> ur, k = argmax |ur_i|.
    int k = 0;
    ur.cwiseAbs().maxCoeff(&k);
    VecR w = ur;
    w(k) -= (ur(k) >= 0 ? 1.0 : -1.0);
    const double wn2 = w.squaredNorm();
    std::vector<VecC> basis;
    basis.reserve(dim - 1);
    for (int i = 0; i < dim; ++i) {
        if (i == k) continue;
        VecR e = VecR::Zero(dim);
        e(i) = 1.0;
        if (wn2 > 1e-30) e -= w * (2.0 * w(i) / wn2);
        VecC ec(n);
        for (int j = 0; j < n; ++j) ec(j) = Complex(e(2 * j), e(2 * j + 1));
        basis.push_back(ec);
    }
    return basis;
}

}  // namespace detail

class HypersurfaceModel final : public CRModel {
public:
    HypersurfaceModel(std::vector<int> weights, RhoChoice rho,
                      double horizontal_scale = 1.0)
        : w_(std::move(weights)), rho_(rho), hscale_(horizontal_scale) {
        if (w_.empty()) throw std::invalid_argument("empty weight vector");
        for (int wi : w_) {
            if (wi < 1)
                throw std::invalid_argument(
                    "weights must be >= 1 (zero weight breaks transversality)");
        }
        if (detail::gcd_of(w_) != 1)
            throw std::invalid_argument("weights must be coprime (effective action)");
        if (rho_ == RhoChoice::PaperEllipsoid &&
            (w_.size() != 2 || w_[0] != 1 || w_[1] != 2))
            throw std::invalid_argument("paper_ellipsoid requires n = 2, weights (1,2)");
        if (hscale_ <= 0.0) throw std::invalid_argument("horizontal scale must be > 0");
    }

    int n() const override { return static_cast<int>(w_.size()); }

    std::string kind() const override {
        return rho_ == RhoChoice::Round ? "sphere" : "ellipsoid";
    }

    std::string descriptor() const override {
        std::ostringstream os;
        os << "kind=" << kind() << "\n";
        os << "weights=";
        for (std::size_t i = 0; i < w_.size(); ++i) os << (i ? "," : "") << w_[i];
        os << "\n";
        if (hscale_ != 1.0) os << "horizontal_scale=" << hscale_ << "\n";
        return os.str();
    }

    const std::vector<int>& weights() const { return w_; }
    RhoChoice rho_choice() const { return rho_; }
    double horizontal_scale() const { return hscale_; }

    double rho(const VecC& z) const {
        double s = -1.0;
        for (int j = 0; j < n(); ++j) s += std::norm(z(j));
        if (rho_ == RhoChoice::PaperEllipsoid) s += std::norm(z(0) * z(0) + z(1));
        return s;
    }

    VecC rho_z(const VecC& z) const {
        VecC g(n());
        for (int j = 0; j < n(); ++j) g(j) = std::conj(z(j));
        if (rho_ == RhoChoice::PaperEllipsoid) {
            const Complex sbar = std::conj(z(0) * z(0) + z(1));
            g(0) += 2.0 * z(0) * sbar;
            g(1) += sbar;
        }
        return g;
    }

    MatC rho_hessian(const VecC& z) const {
        MatC h = MatC::Identity(n(), n());
        if (rho_ == RhoChoice::PaperEllipsoid) {
            h(0, 0) += 4.0 * std::norm(z(0));
            h(0, 1) += 2.0 * z(0);
            h(1, 0) += 2.0 * std::conj(z(0));
            h(1, 1) += 1.0;
        }
        return h;
    }

    Point act(const Point& x, double theta) const override {
        Point y = x;
        for (int j = 0; j < n(); ++j)
            y.z(j) *= std::polar(1.0, w_[j] * theta);
        return y;
    }

    /// Action generator as complex representation of a real vector.
    VecC t_vector(const VecC& z) const {
        VecC t(n());
        for (int j = 0; j < n(); ++j) t(j) = Complex(0.0, w_[j]) * z(j);
        return t;
    }

    /// Re sum_j w_j z_j drho/dz_j; positive on the star-shaped models.
    double radial_pairing(const VecC& z) const {
        const VecC g = rho_z(z);
        Complex s = 0.0;
        for (int j = 0; j < n(); ++j) s += static_cast<double>(w_[j]) * z(j) * g(j);
        return s.real();
    }

    /// T-rigid metric on tangent vectors given in complex representation.
    double metric(const VecC& z, const VecC& v, const VecC& vv) const {
        const VecC g = rho_z(z);
        VecC grad(n());  // complex rep of the Euclidean gradient
        for (int j = 0; j < n(); ++j) grad(j) = 2.0 * std::conj(g(j));
        const VecC s_dir = (Complex(0, 1) * grad).normalized();
        const VecC t = t_vector(z);
        const double tau = real_dot(t, s_dir);
        const double av = real_dot(v, s_dir) / tau;
        const double aw = real_dot(vv, s_dir) / tau;
        const VecC vh = v - av * t;
        const VecC wh = vv - aw * t;
        return hscale_ * real_dot(vh, wh) + av * aw;
    }

    SampleResult sample_point(std::uint64_t seed, std::uint64_t index) const override {
        SampleStream rs(seed, index);
        SampleResult out;
        const int nn = n();
        for (;;) {
            VecC u(nn);
            double norm2 = 0.0;
            for (int j = 0; j < nn; ++j) {
                const double a = rs.normal();
                const double b = rs.normal();
                u(j) = Complex(a, b);
                norm2 += a * a + b * b;
            }
            if (norm2 < 1e-24) {
                ++out.rejected;
                continue;
            }
            u /= std::sqrt(norm2);
            double t = 1.0;
            if (rho_ == RhoChoice::PaperEllipsoid) {
                auto f = [&](double s) { return rho(s * u); };
                // rho(0)=-1, rho(u)>=0: bracket [0,1] always holds.
                double lo = 0.0, hi = 1.0;
                if (f(hi) < 0.0) {
                    ++out.rejected;  // not reachable for this rho; kept for contract
                    continue;
                }
                for (int it = 0; it < 80; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (f(mid) < 0.0 ? lo : hi) = mid;
                }
                t = 0.5 * (lo + hi);
            }
            out.x.z = t * u;
            out.weight = surface_density(u, out.x.z, t) * sphere_area(2 * nn - 1);
            return out;
        }
    }

    ContactFrame contact_frame(const Point& x) const override {
        ContactFrame fr;
        fr.x = x;
        fr.t = t_vector(x.z);
        const VecC g = rho_z(x.z);
        fr.cr_basis = detail::unitary_complement(g.conjugate());
        fr.cr_basis_theta = VecC::Zero(n() - 1);
        const double r = radial_pairing(x.z);
        fr.omega0 = Complex(0, 1) * g / (2.0 * r);
        fr.omega0_theta = 0.0;
        return fr;
    }

    int orbit_period(const Point& x) const override {
        constexpr double tol = 1e-9;
        long long k = 0;
        for (int j = 0; j < n(); ++j)
            if (std::abs(x.z(j)) > tol) k = std::gcd(k, static_cast<long long>(w_[j]));
        if (k == 0) throw std::invalid_argument("all coordinates vanish: point not on X");
        return static_cast<int>(k);
    }

    MatC levi_matrix(const Point& x) const override {
        const VecC g = rho_z(x.z);
        const MatC basis = detail::unitary_complement(g.conjugate());
        const MatC h = rho_hessian(x.z);
        const double r = radial_pairing(x.z);
        MatC m = (basis.transpose() * h * basis.conjugate()) / (r * hscale_);
        return m;
    }

    double on_surface_residual(const Point& x) const override {
        return std::abs(rho(x.z));
    }

    std::vector<Point> designated_anchors() const override {
        std::vector<Point> out;
        if (rho_ == RhoChoice::Round && all_weights_one()) {
            Point p;
            p.z = VecC::Zero(n());
            p.z(0) = 1.0;
            out.push_back(p);
            return out;
        }
        if (n() == 2) {
            for (int j0 = 0; j0 < 2; ++j0) {
                Point p;
                p.z = VecC::Zero(2);
                p.z(j0) = axis_value(j0);
                out.push_back(p);
            }
        }
        return out;
    }

    BRTChart brt_chart(const Point& anchor) const override;

    /// Surface measure density of the radial-graph parametrization against
    /// the round measure on the unit sphere: dv_X = density * dsigma.
    double surface_density(const VecC& u, const VecC& x, double t) const {
        const auto tangent = detail::real_tangent_basis(u);
        const int dim = static_cast<int>(tangent.size());
        const VecC g = rho_z(x);
        const double dr_du = dreal(g, u);
        std::vector<VecC> push(dim);
        for (int i = 0; i < dim; ++i) {
            const double ti = -t * dreal(g, tangent[i]) / dr_du;
            push[i] = t * tangent[i] + ti * u;
        }
        MatR gram(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = i; j < dim; ++j)
                gram(i, j) = gram(j, i) = metric(x, push[i], push[j]);
        return std::sqrt(std::max(0.0, gram.determinant()));
    }

    static double sphere_area(int odd_dim) {
        // Area of the unit sphere S^{2n-1}: 2 pi^n / (n-1)!.
        const int nn = (odd_dim + 1) / 2;
        double a = 2.0;
        for (int j = 1; j <= nn; ++j) a *= kPi;
        for (int j = 1; j <= nn - 1; ++j) a /= j;
        return a;
    }

    bool all_weights_one() const {
        return std::all_of(w_.begin(), w_.end(), [](int x) { return x == 1; });
    }

    /// Positive coordinate value of the axis anchor on {z_j = c e_j0}.
    double axis_value(int j0) const {
        if (rho_ == RhoChoice::Round) return 1.0;
        if (j0 == 1) return std::sqrt(0.5);  // 2 c^2 = 1
        const double t2 = 0.5 * (std::sqrt(5.0) - 1.0);  // t^4 + t^2 = 1
        return std::sqrt(t2);
    }

private:
    static double dreal(const VecC& rho_grad, const VecC& v) {
        Complex s = 0.0;
        for (int j = 0; j < rho_grad.size(); ++j) s += rho_grad(j) * v(j);
        return 2.0 * s.real();
    }

    std::vector<int> w_;
    RhoChoice rho_;
    double hscale_;
};

inline HypersurfaceModel make_weighted_sphere(const std::vector<int>& w,
                                              RhoChoice rho_choice,
                                              double horizontal_scale = 1.0) {
    return HypersurfaceModel(w, rho_choice, horizontal_scale);
}

// ---------------------------------------------------------------------------
// Circle bundles over the projective line
// ---------------------------------------------------------------------------

class CircleBundleModel final : public CRModel {
public:
    CircleBundleModel(int degree, double perturbation)
        : d_(degree), c_(perturbation) {
        if (!std::isfinite(perturbation))
            throw std::invalid_argument("perturbation amplitude must be finite");
    }

    int n() const override { return 2; }
    std::string kind() const override { return "bundle"; }

    std::string descriptor() const override {
        std::ostringstream os;
        os << "kind=bundle\ndegree=" << d_ << "\nperturbation=" << c_ << "\n";
        return os.str();
    }

    int degree() const { return d_; }
    double perturbation() const { return c_; }

    /// First-spherical-harmonic perturbation profile on the affine chart.
    static double psi(const Complex& z) {
        const double r2 = std::norm(z);
        return (1.0 - r2) / (1.0 + r2);
    }

    /// Metric weight on the given chart.
    double weight(int chart, const Complex& z) const {
        const double sgn = (chart == 0) ? 1.0 : -1.0;
        return 0.5 * d_ * std::log1p(std::norm(z)) + sgn * c_ * psi(z);
    }

    /// Levi eigenvalue (curvature / 2 against the Fubini-Study base metric).
    double levi_eigenvalue(int chart, const Complex& z) const {
        const double sgn = (chart == 0) ? 1.0 : -1.0;
        return 0.5 * d_ - 2.0 * sgn * c_ * psi(z);
    }

    Point act(const Point& x, double theta) const override {
        Point y = x;
        y.theta = std::remainder(y.theta + theta, 2.0 * kPi);
        return y;
    }

    SampleResult sample_point(std::uint64_t seed, std::uint64_t index) const override {
        SampleStream rs(seed, index);
        SampleResult out;
        const double s = rs.uniform();            // FS-uniform radial cdf
        const double r = std::sqrt(s / std::max(1.0 - s, 1e-300));
        const double a = 2.0 * kPi * rs.uniform();
        out.x.chart = 0;
        out.x.z = VecC::Constant(1, std::polar(r, a));
        out.x.theta = 2.0 * kPi * rs.uniform() - kPi;
        out.weight = 4.0 * kPi * kPi;              // Vol(X) under the chosen metric
        return out;
    }

    ContactFrame contact_frame(const Point& x) const override {
        ContactFrame fr;
        fr.x = x;
        fr.t = VecC::Zero(1);
        fr.t_theta = 1.0;
        const Complex z = x.z(0);
        const Complex wz = weight_z(x.chart, z);
        const double g = fs_density(z);
        MatC basis(1, 1);
        basis(0, 0) = 1.0 / std::sqrt(g);  // Z / |Z|, Z = d/dz + i w_z d/dtheta
        fr.cr_basis = basis;
        fr.cr_basis_theta = VecC::Constant(1, Complex(0, 1) * wz / std::sqrt(g));
        fr.omega0 = VecC::Constant(1, Complex(0, 1) * wz);
        fr.omega0_theta = -1.0;
        return fr;
    }

    int orbit_period(const Point&) const override { return 1; }

    MatC levi_matrix(const Point& x) const override {
        return MatC::Constant(1, 1, levi_eigenvalue(x.chart, x.z(0)));
    }

    double on_surface_residual(const Point&) const override { return 0.0; }

    std::vector<Point> designated_anchors() const override {
        std::vector<Point> out(2);
        out[0].chart = 0;
        out[0].z = VecC::Zero(1);
        out[1].chart = 1;
        out[1].z = VecC::Zero(1);
        return out;
    }

    BRTChart brt_chart(const Point& anchor) const override {
        if (anchor.z.size() != 1 || std::abs(anchor.z(0)) > 1e-12)
            throw std::invalid_argument("bundle anchors are the fiber points over chart centers");
        const int chart = anchor.chart;
        BRTChart c;
        c.anchor = anchor;
        c.dim = 1;
        c.epsilon = std::numeric_limits<double>::infinity();
        c.delta = kPi;
        c.lambda = {levi_eigenvalue(chart, 0.0)};
        const double w0 = weight(chart, 0.0);
        c.phi = [this, chart, w0](const VecC& z) { return weight(chart, z(0)) - w0; };
        c.density = [](const VecC& z) { return fs_density(z(0)); };
        return c;
    }

    static double fs_density(const Complex& z) {
        const double q = 1.0 + std::norm(z);
        return 1.0 / (q * q);
    }

    Complex weight_z(int chart, const Complex& z) const {
        const double sgn = (chart == 0) ? 1.0 : -1.0;
        const double q = 1.0 + std::norm(z);
        // d/dz of the FS part and of psi = (1-r^2)/(1+r^2)
        return 0.5 * d_ * std::conj(z) / q - 2.0 * sgn * c_ * std::conj(z) / (q * q);
    }

private:
    int d_;
    double c_;
};

inline CircleBundleModel make_circle_bundle(int degree, double perturbation) {
    return CircleBundleModel(degree, perturbation);
}

// ---------------------------------------------------------------------------
// Canonical charts on hypersurfaces (designated anchors)
// ---------------------------------------------------------------------------

namespace detail {

/// Chart machinery at an axis anchor (single nonzero coordinate j0) of a
/// two-dimensional weighted hypersurface.  The transverse coordinate is the
/// invariant CR function zeta = z_{j1} (z_{j0}/c0)^{-w_{j1}/w_{j0}}; theta is
/// recovered from arg z_{j0}.  Points on the zero-angle slice solve a
/// quadratic in the j0 modulus.
struct AxisSliceChart {
    const HypersurfaceModel* model;
    int j0;          // anchor coordinate
    int j1;          // transverse coordinate
    double c0;       // anchor value
    double scale;    // zeta rescale making the frame orthonormal at 0

    VecC point_on_slice(Complex zeta_scaled) const {
        const Complex zeta = zeta_scaled / scale;
        double s = 0.0;  // modulus of the j0 coordinate
        if (model->rho_choice() == RhoChoice::Round) {
            if (j0 == 1) {
                // z = (zeta sqrt(s), s): s |zeta|^2 + s^2 = 1
                const double a = 1.0, b = std::norm(zeta);
                s = 0.5 * (-b + std::sqrt(b * b + 4.0 * a)) / a;
                VecC z(2);
                z(1) = s;
                z(0) = zeta * std::sqrt(s);
                return z;
            }
            // z = (s, zeta s^2 / c0^2): s^2 + |zeta|^2 s^4 = 1
            const double a = std::norm(zeta), s2 = root_of_quadratic(a);
            VecC z(2);
            z(0) = std::sqrt(s2);
            z(1) = zeta * s2;
            return z;
        }
        if (j0 == 1) {
            // z = (zeta sqrt(s/c0), s): s|zeta|^2/c0 + s^2(|1+zeta^2/c0|^2+1) = 1
            const double a = std::norm(1.0 + zeta * zeta / c0) + 1.0;
            const double b = std::norm(zeta) / c0;
            s = 0.5 * (-b + std::sqrt(b * b + 4.0 * a)) / a;
            VecC z(2);
            z(1) = s;
            z(0) = zeta * std::sqrt(s / c0);
            return z;
        }
        // z = (s, zeta s^2/c0^2): s^2 + s^4(|1+zeta/c0^2|^2 + |zeta|^2/c0^4) = 1
        const double a =
            std::norm(1.0 + zeta / (c0 * c0)) + std::norm(zeta) / (c0 * c0 * c0 * c0);
        const double s2 = root_of_quadratic(a);
        VecC z(2);
        z(0) = std::sqrt(s2);
        z(1) = zeta * s2 / (c0 * c0);
        return z;
    }

    static double root_of_quadratic(double a) {
        // a x^2 + x - 1 = 0, positive root, stable for small a
        if (a < 1e-14) return 1.0 - a;
        return 2.0 / (1.0 + std::sqrt(1.0 + 4.0 * a));
    }

    /// d/dzeta and d/dzetabar of the slice map (finite differences).
    void slice_derivatives(Complex zeta, VecC& dz, VecC& dzb) const {
        const double h = 1e-6;
        const VecC fxp = point_on_slice(zeta + h), fxm = point_on_slice(zeta - h);
        const VecC fyp = point_on_slice(zeta + Complex(0, h));
        const VecC fym = point_on_slice(zeta - Complex(0, h));
        const VecC fx = (fxp - fxm) / (2 * h), fy = (fyp - fym) / (2 * h);
        dz = 0.5 * (fx - Complex(0, 1) * fy);
        dzb = 0.5 * (fx + Complex(0, 1) * fy);
    }

    /// phi_zeta at a chart point, from the T^{1,0} line expressed in the
    /// chart frame: A = a dX(d/dzeta) + b dX(d/dzetabar) + c T, b ~ 0,
    /// and i phi_zeta = c / a.
    Complex phi_z(Complex zeta) const {
        VecC dz, dzb;
        slice_derivatives(zeta, dz, dzb);
        const VecC x = point_on_slice(zeta);
        const VecC g = model->rho_z(x);
        const MatC cr = unitary_complement(g.conjugate());
        const VecC a_vec = cr.col(0);
        const VecC t = model->t_vector(x);
        // Complexified tangent: rows = (holomorphic, antiholomorphic) ambient parts.
        Eigen::Matrix<Complex, 4, 3> b;
        Eigen::Matrix<Complex, 4, 1> rhs;
        for (int j = 0; j < 2; ++j) {
            b(j, 0) = dz(j);
            b(j, 1) = dzb(j);
            b(j, 2) = t(j);
            b(j + 2, 0) = std::conj(dzb(j));
            b(j + 2, 1) = std::conj(dz(j));
            b(j + 2, 2) = std::conj(t(j));
            rhs(j) = a_vec(j);
            rhs(j + 2) = 0.0;
        }
        const Eigen::Matrix<Complex, 3, 1> sol =
            b.colPivHouseholderQr().solve(rhs);
        return Complex(0, -1) * sol(2) / sol(0) / scale;
    }

    double phi(Complex zeta_scaled) const {
        // Radial line integral of d phi; phi(0) = 0.  phi_z returns the
        // derivative in scaled units, so the integrand is d/dt phi(t zeta).
        static const QuadRule gl = gauss_legendre(24, 0.0, 1.0);
        double acc = 0.0;
        for (int i = 0; i < 24; ++i) {
            const Complex pz = phi_z(gl.x[i] * zeta_scaled / scale);
            acc += gl.w[i] * 2.0 * (pz * zeta_scaled).real();
        }
        return acc;
    }

    double density(Complex zeta_scaled) const {
        const Complex zeta = zeta_scaled / scale;
        VecC dz, dzb;
        slice_derivatives(zeta, dz, dzb);
        const VecC x = point_on_slice(zeta);
        // Real pushforwards of d/dx, d/dy in chart units, plus T.
        const VecC ex = (dz + dzb) / scale;
        const VecC ey = (Complex(0, 1) * (dz - dzb)) / scale;
        const VecC t = model->t_vector(x);
        MatR gram(3, 3);
        const VecC vecs[3] = {ex, ey, t};
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j)
                gram(i, j) = gram(j, i) = model->metric(x, vecs[i], vecs[j]);
        return std::sqrt(std::max(0.0, gram.determinant())) / 2.0;
    }
};

}  // namespace detail

inline BRTChart HypersurfaceModel::brt_chart(const Point& anchor) const {
    const double atol = 1e-9;
    if (rho_ == RhoChoice::Round && all_weights_one()) {
        // Any anchor: the chart of the standard fibration of the sphere over
        // projective space, rotated to the anchor; phi and the density are
        // anchor-independent.
        if (std::abs(on_surface_residual(anchor)) > 1e-10)
            throw std::invalid_argument("anchor not on X");
        BRTChart c;
        c.anchor = anchor;
        c.dim = n() - 1;
        c.epsilon = std::numeric_limits<double>::infinity();
        c.delta = kPi;
        c.lambda.assign(n() - 1, 1.0);
        const int nn = n();
        c.phi = [](const VecC& z) { return 0.5 * std::log1p(2.0 * z.squaredNorm()); };
        c.density = [nn](const VecC& z) {
            return std::pow(1.0 + 2.0 * z.squaredNorm(), -nn);
        };
        return c;
    }
    if (n() != 2)
        throw std::invalid_argument("designated anchors exist only for n = 2 models");
    int j0 = -1;
    for (int j = 0; j < 2; ++j) {
        if (std::abs(anchor.z(j)) > atol) {
            if (j0 >= 0) throw std::invalid_argument("anchor must be an axis point");
            j0 = j;
        }
    }
    if (j0 < 0) throw std::invalid_argument("anchor must be an axis point");
    const double c0 = axis_value(j0);
    if (std::abs(std::abs(anchor.z(j0)) - c0) > 1e-9)
        throw std::invalid_argument("anchor not on X");

    auto slice = std::make_shared<detail::AxisSliceChart>();
    slice->model = this;
    slice->j0 = j0;
    slice->j1 = 1 - j0;
    slice->c0 = c0;
    slice->scale = 1.0;
    // Normalize the chart coordinate so the frame is orthonormal at 0.
    {
        VecC dz, dzb;
        slice->slice_derivatives(0.0, dz, dzb);
        slice->scale = dz.norm() / std::sqrt(2.0) * std::sqrt(hscale_);
    }
    // Stabilizer order at the anchor (only z_{j0} nonzero): gcd of active weights.
    Point p;
    p.z = VecC::Zero(2);
    p.z(j0) = c0;
    const int period = orbit_period(p);

    BRTChart c;
    c.anchor = anchor;
    c.dim = 1;
    c.epsilon = 0.35;
    c.delta = kPi / period;
    {
        Eigen::SelfAdjointEigenSolver<MatC> es(levi_matrix(p));
        c.lambda = {es.eigenvalues()(0)};
    }
    c.phi = [slice](const VecC& z) { return slice->phi(z(0)); };
    c.density = [slice](const VecC& z) { return slice->density(z(0)); };
    return c;
}

}  // namespace crmorse
