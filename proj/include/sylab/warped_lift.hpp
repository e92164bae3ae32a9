#pragma once

// Warped products B x K with metric g + omega^2 kappa over a flat ball B in R^N
// and a flat k-torus K. For fiber-invariant u
//   Delta u = Delta_g u + (k/omega) g(grad omega, grad u),
// so K-invariant solutions are solutions of the anisotropic equation with
// a = omega^k on the base.

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sylab/coefficients.hpp"
#include "sylab/error.hpp"
#include "sylab/exponents.hpp"
#include "sylab/grid.hpp"
#include "sylab/hyperdual.hpp"

namespace sylab {

/// The warping function omega on the base: radial (a RadialFunction of |x|)
/// or affine offset + slope . x.
class WarpFunction {
   public:
    enum class Kind { Radial, Affine };

    static WarpFunction radial(RadialFunction f) {
        WarpFunction w;
        w.kind_ = Kind::Radial;
        w.radial_ = std::move(f);
        return w;
    }
    static WarpFunction affine(double offset, std::vector<double> slope) {
        WarpFunction w;
        w.kind_ = Kind::Affine;
        w.offset_ = offset;
        w.slope_ = std::move(slope);
        return w;
    }

    Kind kind() const { return kind_; }
    const RadialFunction& radial_part() const { return radial_; }

    double operator()(const std::vector<double>& x) const {
        if (kind_ == Kind::Affine) return affine_eval(x);
        double s = 0.0;
        for (double v : x) s += v * v;
        return radial_.value(std::sqrt(s));
    }
    HyperDual operator()(const std::vector<HyperDual>& x) const {
        if (kind_ == Kind::Affine) return affine_eval(x);
        HyperDual s;
        for (const auto& v : x) s += v * v;
        const auto r = sqrt(s);
        return chain(r, radial_.value(r.a), radial_.d1(r.a), radial_.d2(r.a));
    }

    /// Exact gradient; the radial families are even in r, so grad omega(0) = 0.
    std::vector<double> gradient(const std::vector<double>& x) const {
        std::vector<double> g(x.size(), 0.0);
        if (kind_ == Kind::Affine) {
            for (std::size_t i = 0; i < x.size(); ++i) g[i] = i < slope_.size() ? slope_[i] : 0.0;
            return g;
        }
        double s = 0.0;
        for (double v : x) s += v * v;
        const double r = std::sqrt(s);
        if (r == 0.0) return g;
        const double d = radial_.d1(r) / r;
        for (std::size_t i = 0; i < x.size(); ++i) g[i] = d * x[i];
        return g;
    }

    /// min of omega over the closed ball of radius R (sampled for radial kinds).
    double min_on_ball(double R, int N) const {
        if (kind_ == Kind::Affine) {
            double n2 = 0.0;
            for (int i = 0; i < N && i < int(slope_.size()); ++i) n2 += slope_[i] * slope_[i];
            return offset_ - std::sqrt(n2) * R;
        }
        double m = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= 4000; ++i) m = std::min(m, radial_.value(R * i / 4000.0));
        return m;
    }

    std::string describe() const {
        if (kind_ == Kind::Radial) return radial_.describe();
        std::ostringstream os;
        os << "affine(" << offset_;
        for (double s : slope_) os << "," << s;
        os << ")";
        return os.str();
    }

   private:
    template <class T>
    T affine_eval(const std::vector<T>& x) const {
        T s = T(offset_);
        for (std::size_t i = 0; i < x.size() && i < slope_.size(); ++i) s += T(slope_[i]) * x[i];
        return s;
    }

    Kind kind_ = Kind::Radial;
    RadialFunction radial_ = RadialFunction::constant(1.0);
    double offset_ = 1.0;
    std::vector<double> slope_;
};

struct WarpedSpec {
    int N = 5;        ///< base dimension
    int k_fiber = 2;  ///< fiber dimension
    WarpFunction omega = WarpFunction::radial(RadialFunction::constant(1.0));

    int n() const { return N + k_fiber; }

    void validate(double R) const {
        if (N < 1 || k_fiber < 1) throw ValidationError("warped product needs N >= 1 and k_fiber >= 1");
        if (!(omega.min_on_ball(R, N) > 0.0)) throw ValidationError("warping function must stay positive on the ball");
    }
};

/// a = omega^k as a coefficient of the base equation; exact for constant and
/// polynomial-in-r^2 omega.
inline RadialFunction omega_power_coefficient(const WarpedSpec& s) {
    if (s.omega.kind() != WarpFunction::Kind::Radial) {
        throw ValidationError("a = omega^k needs a radial warping function");
    }
    const auto& f = s.omega.radial_part();
    if (f.kind() == RadialFunction::Kind::Constant) return RadialFunction::constant(std::pow(f.params()[0], s.k_fiber));
    if (f.kind() != RadialFunction::Kind::PolynomialR2) {
        throw ValidationError("a = omega^k is represented only for constant or polynomial omega, got " + f.describe());
    }
    std::vector<double> acc{1.0};
    for (int m = 0; m < s.k_fiber; ++m) {
        std::vector<double> next(acc.size() + f.params().size() - 1, 0.0);
        for (std::size_t i = 0; i < acc.size(); ++i)
            for (std::size_t j = 0; j < f.params().size(); ++j) next[i + j] += acc[i] * f.params()[j];
        acc = std::move(next);
    }
    return RadialFunction::polynomial_r2(std::move(acc));
}

// ------------------------------------------------------ Laplacian identity

/// A fiber-invariant test function (1 + x1 - x2^2/2 + 3 x1 x3/10) exp(-|x|^2/2).
struct PolyGaussian {
    template <class T>
    T operator()(const std::vector<T>& x) const {
        using std::exp;
        const std::size_t n = x.size();
        const T& x1 = x[0];
        const T& x2 = x[1 % n];
        const T& x3 = x[2 % n];
        T s2 = T(0.0);
        for (const auto& v : x) s2 += v * v;
        return (T(1.0) + x1 - T(0.5) * x2 * x2 + T(0.3) * x1 * x3) * exp(T(-0.5) * s2);
    }
};

/// The constant 1, for the trivial case.
struct UnitFunction {
    template <class T>
    T operator()(const std::vector<T>&) const {
        return T(1.0);
    }
};

namespace detail {

inline std::vector<HyperDual> seeded(const std::vector<double>& z, int i, int j) {
    std::vector<HyperDual> h(z.begin(), z.end());
    if (i >= 0) h[i].b = 1.0;
    if (j >= 0) h[j].c = 1.0;
    return h;
}

/// Dense inverse and determinant by Gauss-Jordan without pivoting; the metric is
/// symmetric positive definite.
inline std::vector<std::vector<HyperDual>> invert(std::vector<std::vector<HyperDual>> A, HyperDual& det) {
    const std::size_t n = A.size();
    std::vector<std::vector<HyperDual>> I(n, std::vector<HyperDual>(n, HyperDual(0.0)));
    for (std::size_t i = 0; i < n; ++i) I[i][i] = 1.0;
    det = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
        const HyperDual piv = A[c][c];
        det *= piv;
        for (std::size_t k = 0; k < n; ++k) {
            A[c][k] /= piv;
            I[c][k] /= piv;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const HyperDual f = A[r][c];
            for (std::size_t k = 0; k < n; ++k) {
                A[r][k] -= f * A[c][k];
                I[r][k] -= f * I[c][k];
            }
        }
    }
    return I;
}

}  // namespace detail

/// Metric components of g + omega^2 kappa at z = (x, y), x in R^N, y in T^k.
inline std::vector<std::vector<HyperDual>> product_metric(const WarpedSpec& s, const std::vector<HyperDual>& z) {
    const int n = s.n();
    std::vector<HyperDual> x(z.begin(), z.begin() + s.N);
    const HyperDual w = s.omega(x);
    std::vector<std::vector<HyperDual>> G(n, std::vector<HyperDual>(n, HyperDual(0.0)));
    for (int i = 0; i < s.N; ++i) G[i][i] = 1.0;
    for (int i = s.N; i < n; ++i) G[i][i] = w * w;
    return G;
}

/// Laplace-Beltrami (1/sqrt|G|) d_i (sqrt|G| G^{ij} d_j u) computed from the
/// metric components alone.
template <class U>
double laplace_beltrami(const WarpedSpec& s, const U& u, const std::vector<double>& z) {
    const int n = s.n();
    double sum = 0.0, vol = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const auto zh = detail::seeded(z, i, j);
            HyperDual det;
            const auto Ginv = detail::invert(product_metric(s, zh), det);
            const HyperDual W = sqrt(det) * Ginv[i][j];
            const HyperDual uh = u(std::vector<HyperDual>(zh.begin(), zh.begin() + s.N));
            // d_i W_ij d_j u + W_ij d_i d_j u
            sum += W.b * uh.c + W.a * uh.d;
            vol = std::sqrt(det.a);
        }
    }
    return sum / vol;
}

/// Delta_g u + (k/omega) g(grad omega, grad u) on the flat base.
template <class U>
double reduced_laplacian(const WarpedSpec& s, const U& u, const std::vector<double>& x) {
    double lap = 0.0, cross = 0.0;
    const auto gw = s.omega.gradient(x);
    for (int i = 0; i < s.N; ++i) {
        const auto uh = u(detail::seeded(x, i, i));
        lap += uh.d;
        cross += gw[i] * uh.b;
    }
    return lap + s.k_fiber / s.omega(x) * cross;
}

struct LaplacianCheckReport {
    int samples = 0;
    double max_discrepancy = 0.0;
    double max_magnitude = 0.0;  ///< largest |Delta u| seen, for scale
};

/// Compares the reduction formula with the metric computation at random
/// (x, y), |x| < radius, y in [0, 1)^k.
template <class U>
LaplacianCheckReport product_laplacian_check(const WarpedSpec& s, const U& u, int sample_count, std::uint64_t seed,
                                             double radius = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> G(0.0, 1.0);
    std::uniform_real_distribution<double> U01(0.0, 1.0);
    LaplacianCheckReport rep;
    for (int t = 0; t < sample_count; ++t) {
        std::vector<double> z(s.n());
        double n2 = 0.0;
        for (int i = 0; i < s.N; ++i) n2 += (z[i] = G(rng)) * z[i];
        const double scale = radius * std::pow(U01(rng), 1.0 / s.N) / std::sqrt(n2);
        for (int i = 0; i < s.N; ++i) z[i] *= scale;
        for (int i = s.N; i < s.n(); ++i) z[i] = U01(rng);
        const double lhs = laplace_beltrami(s, u, z);
        const double rhs = reduced_laplacian(s, u, std::vector<double>(z.begin(), z.begin() + s.N));
        rep.max_discrepancy = std::max(rep.max_discrepancy, std::abs(lhs - rhs));
        rep.max_magnitude = std::max(rep.max_magnitude, std::abs(lhs));
        ++rep.samples;
    }
    return rep;
}

// --------------------------------------------------------- minimal fibers

struct MinimalityReport {
    double gradient_norm = 0.0;
    bool minimal = false;
};

/// {xi0} x K is minimal exactly when grad omega(xi0) = 0.
inline MinimalityReport fiber_minimality_check(const WarpedSpec& s, const std::vector<double>& xi0) {
    if (int(xi0.size()) != s.N) throw ValidationError("base point has the wrong dimension");
    MinimalityReport rep;
    for (double g : s.omega.gradient(xi0)) rep.gradient_norm += g * g;
    rep.gradient_norm = std::sqrt(rep.gradient_norm);
    rep.minimal = rep.gradient_norm <= 1e-10;
    return rep;
}

// ------------------------------------------------------- reduced residuals

/// -div(a grad u) + a h u - a u^p for radial u, with a and a' sampled at the
/// nodes. Interior nodes only.
inline GridFunction anisotropic_residual(const GridFunction& u, const std::vector<double>& a,
                                         const std::vector<double>& da, const std::vector<double>& h, int N,
                                         double p) {
    const auto& m = *u.mesh;
    const auto d1 = derivative(m, u.radial());
    const auto d2 = second_derivative(m, u.radial());
    GridFunction res(u.mesh);
    for (std::size_t i = 1; i + 1 < m.size(); ++i) {
        const double r = m.r[i];
        res.radial()[i] = -a[i] * (d2[i] + (N - 1.0) / r * d1[i]) - da[i] * d1[i] + a[i] * h[i] * u[i] -
                          a[i] * std::pow(std::abs(u[i]), p);
    }
    return res;
}

/// omega^k (-Delta v - (k/omega) omega' v' + h v - v^p): the fiber-invariant
/// equation on the product, written on the base.
inline GridFunction reduced_operator_residual(const GridFunction& v, const WarpedSpec& s, const RadialFunction& h,
                                              double p) {
    if (s.omega.kind() != WarpFunction::Kind::Radial) {
        throw ValidationError("reduced residual on a radial mesh needs a radial warping function");
    }
    const auto& m = *v.mesh;
    const auto& w = s.omega.radial_part();
    const auto d1 = derivative(m, v.radial());
    const auto d2 = second_derivative(m, v.radial());
    GridFunction res(v.mesh);
    for (std::size_t i = 1; i + 1 < m.size(); ++i) {
        const double r = m.r[i], om = w.value(r), wk = std::pow(om, s.k_fiber);
        const double eq = -(d2[i] + (s.N - 1.0) / r * d1[i]) - s.k_fiber / om * w.d1(r) * d1[i] +
                          h.value(r) * v[i] - std::pow(std::abs(v[i]), p);
        res.radial()[i] = wk * eq;
    }
    return res;
}

struct ResidualIdentityReport {
    double max_abs = 0.0;  ///< max |R_reduced - R_aniso|
    double max_rel = 0.0;  ///< same, relative to the size of the individual terms
};

/// Node-wise comparison of the two residual forms with a = omega^k.
inline ResidualIdentityReport residual_identity(const GridFunction& u, const WarpedSpec& s, const RadialFunction& h,
                                                double p) {
    const auto& m = *u.mesh;
    const auto& w = s.omega.radial_part();
    const int k = s.k_fiber;
    std::vector<double> a(m.size()), da(m.size()), hv(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double r = m.r[i];
        a[i] = std::pow(w.value(r), k);
        da[i] = k * std::pow(w.value(r), k - 1) * w.d1(r);
        hv[i] = h.value(r);
    }
    const auto r1 = reduced_operator_residual(u, s, h, p);
    const auto r2 = anisotropic_residual(u, a, da, hv, s.N, p);
    const auto d1 = derivative(m, u.radial());
    const auto d2 = second_derivative(m, u.radial());
    ResidualIdentityReport rep;
    for (std::size_t i = 1; i + 1 < m.size(); ++i) {
        const double diff = std::abs(r1[i] - r2[i]);
        const double size = a[i] * (std::abs(d2[i]) + (s.N - 1.0) / m.r[i] * std::abs(d1[i])) +
                            std::abs(da[i] * d1[i]) + a[i] * (std::abs(hv[i] * u[i]) + std::pow(std::abs(u[i]), p));
        rep.max_abs = std::max(rep.max_abs, diff);
        if (size > 0.0) rep.max_rel = std::max(rep.max_rel, diff / size);
    }
    return rep;
}

// ------------------------------------------------------------------ lift

/// u(x, y) = v(|x|), independent of the fiber point. Linear interpolation
/// between nodes; below the first node the core law v ~ rho^{-2/(p-1)}.
inline double lift_evaluate(const GridFunction& v, double p, const std::vector<double>& base_point,
                            const std::vector<double>& /*fiber_point*/) {
    double s = 0.0;
    for (double x : base_point) s += x * x;
    const double r = std::sqrt(s);
    const auto& m = *v.mesh;
    if (r > m.r.back()) throw ValidationError("base point outside the solved ball");
    if (r <= m.r.front()) {
        if (r == 0.0) return std::numeric_limits<double>::infinity();
        return v[0] * std::pow(m.r.front() / r, blowup_rate(p));
    }
    const auto it = std::upper_bound(m.r.begin(), m.r.end(), r);
    const std::size_t i = std::size_t(it - m.r.begin()) - 1;
    if (i + 1 >= m.size()) return v[m.size() - 1];
    const double t = (r - m.r[i]) / (m.r[i + 1] - m.r[i]);
    return (1.0 - t) * v[i] + t * v[i + 1];
}

}  // namespace sylab
