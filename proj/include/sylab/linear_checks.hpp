#pragma once

// Empirical counterparts of the maximum principle, the coercivity
// constant of the form and the Hardy inequality.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <vector>

#include "sylab/mode_solver.hpp"
#include "sylab/radial_profile.hpp"

namespace sylab {

namespace detail {

/// 4-point Gauss-Legendre nodes and weights on [-1, 1].
inline constexpr std::array<double, 4> kGaussX{-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                               0.8611363115940526};
inline constexpr std::array<double, 4> kGaussW{0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                               0.3478548451374538};

template <class F>
double gauss_integral(double lo, double hi, F&& f) {
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    double s = 0.0;
    for (int q = 0; q < 4; ++q) s += kGaussW[q] * f(c + h * kGaussX[q]);
    return h * s;
}

}  // namespace detail

// ---------------------------------------------------------------- coercivity

/// P1 finite-element matrices of the radial forms on [0, R] with v(R) = 0:
/// `form` for int a (v'^2 + h v^2) r^{N-1}, `dirichlet` for int v'^2 r^{N-1}.
struct RadialForms {
    Tridiagonal form;
    Tridiagonal dirichlet;
    std::vector<double> nodes;
};

inline RadialForms radial_forms(const CoefficientField& c, double R, int N, int elements = 2000) {
    if (elements < 2) throw ValidationError("radial forms need at least 2 elements");
    const int n = elements;  // free nodes 0..n-1; node n = R is fixed to zero
    RadialForms F{Tridiagonal(n), Tridiagonal(n), std::vector<double>(n + 1)};
    const double h = R / elements;
    for (int i = 0; i <= n; ++i) F.nodes[i] = i * h;
    for (int e = 0; e < elements; ++e) {
        const double lo = e * h, hi = lo + h;
        auto w = [&](double r) { return std::pow(r, N - 1.0); };
        const double kd = detail::gauss_integral(lo, hi, [&](double r) { return w(r); }) / (h * h);
        const double ka = detail::gauss_integral(lo, hi, [&](double r) { return c.a.value(r) * w(r); }) / (h * h);
        auto mass = [&](int i, int k) {
            return detail::gauss_integral(lo, hi, [&](double r) {
                const double pi = i == 0 ? (hi - r) / h : (r - lo) / h;
                const double pk = k == 0 ? (hi - r) / h : (r - lo) / h;
                return c.a.value(r) * c.h.value(r) * pi * pk * w(r);
            });
        };
        const double m00 = mass(0, 0), m01 = mass(0, 1), m11 = mass(1, 1);
        const int i0 = e, i1 = e + 1;
        F.dirichlet.diag[i0] += kd;
        F.form.diag[i0] += ka + m00;
        if (i1 < n) {
            F.dirichlet.diag[i1] += kd;
            F.dirichlet.upper[i0] -= kd;
            F.dirichlet.lower[i1] -= kd;
            F.form.diag[i1] += ka + m11;
            F.form.upper[i0] += -ka + m01;
            F.form.lower[i1] += -ka + m01;
        }
    }
    return F;
}

/// Number of negative pivots in the LDL^T factorization of A - mu B, i.e. the
/// number of generalized eigenvalues below mu (Sylvester's law of inertia).
inline int eigenvalues_below(const Tridiagonal& A, const Tridiagonal& B, double mu) {
    int count = 0;
    double d = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i) {
        double v = A.diag[i] - mu * B.diag[i];
        if (i > 0) {
            const double off = A.lower[i] - mu * B.lower[i];
            v -= off * off / (d != 0.0 ? d : 1e-300);
        }
        if (v < 0.0) ++count;
        d = v;
    }
    return count;
}

/// c0 = smallest generalized Rayleigh quotient of the form over the Dirichlet
/// energy for radial v with v(R) = 0, by inertia bisection.
inline double coercivity_constant(const CoefficientField& c, double R, int N, int elements = 2000) {
    const auto F = radial_forms(c, R, N, elements);
    double hi = 1.0;
    while (eigenvalues_below(F.form, F.dirichlet, hi) == 0) hi *= 2.0;
    double lo = -1.0;
    while (eigenvalues_below(F.form, F.dirichlet, lo) > 0) lo *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (eigenvalues_below(F.form, F.dirichlet, mid) > 0 ? hi : lo) = mid;
    }
    const double c0 = 0.5 * (lo + hi);
    if (!(c0 > 0.0)) {
        std::ostringstream os;
        os << "operator not coercive: c0 = " << c0 << " <= 0 for int a(|grad v|^2 + h v^2) >= c0 int |grad v|^2";
        throw ValidationError(os.str());
    }
    return c0;
}

/// The bound alpha on sup_{s>=1} s^2 u_1^{p-1}(s) under which
/// p a u_eps^{p-1} <= c0 (N-2)^2 / (8 rho^2) holds for rho >= eps.
inline double normalization_bound(double c0, int N, double p, double max_a) {
    return c0 * (N - 2.0) * (N - 2.0) / (8.0 * p * max_a);
}

// ---------------------------------------------------------- maximum principle

/// Positive parts below this fraction of max|w| count as rounding: next to the
/// Dirichlet ends w is O(1e-12) relative even for exact arithmetic-signed data.
inline constexpr double kSignTolerance = 1e-10;

struct MaxPrincipleReport {
    int trials = 0;
    int violations = 0;          ///< trials with some w > 0
    double worst_positive = 0.0;  ///< largest max(w)/max|w| seen
    double normalization_margin = 0.0;  ///< bound / max of rho^2 p a u_bar^{p-1} over [eps, R]
    bool normalization_ok = false;
    double required_lambda = 1.0;  ///< normalization scale that would satisfy the bound
    bool passed() const { return normalization_ok && violations == 0; }
};

/// Solves L_eps w = g >= 0 on eps <= rho <= R with w = 0 on both boundaries for
/// random g and counts sign violations (w > 0). `potential_scale` multiplies
/// the potential term (negative controls); with `enforce` a violated
/// normalization throws.
inline MaxPrincipleReport max_principle_check(const ProblemParams& P, const CoefficientField& c, const ScaledFamily& u_eps,
                                              double c0, int trials, std::uint64_t seed, bool enforce = true,
                                              double potential_scale = 1.0, int nodes_per_shell = 32) {
    const auto mesh = graded_mesh(P.epsilon, P.sigma, P.R, nodes_per_shell);
    const auto L = linearize(P, c, u_eps, mesh);
    MaxPrincipleReport rep;
    const double bound = c0 * (P.N - 2.0) * (P.N - 2.0) / 8.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < mesh->size(); ++i) {
        const double r = mesh->r[i];
        worst = std::max(worst, potential_scale * P.p * c.a.value(r) * std::pow(L.u_bar[i], P.p - 1.0) * r * r);
    }
    rep.normalization_margin = worst > 0.0 ? bound / worst : std::numeric_limits<double>::infinity();
    rep.normalization_ok = rep.normalization_margin >= 1.0;
    if (!rep.normalization_ok) {
        const double alpha = normalization_bound(c0, P.N, P.p, c.max_a(P.R)) / potential_scale;
        rep.required_lambda = select_normalization(u_eps.base, alpha).lambda;
        if (enforce) {
            std::ostringstream os;
            os << "normalization p a u^{p-1} <= c0 (N-2)^2/(8 rho^2) fails on [eps,R] (margin "
               << rep.normalization_margin << "); rescale the profile with lambda <= " << rep.required_lambda;
            throw ValidationError(os.str());
        }
    }
    const auto op = assemble_mode(0, L, 0.0, InnerClosure::Dirichlet, potential_scale);
    const TridiagonalLU lu(op.matrix, 0);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int t = 0; t < trials; ++t) {
        std::vector<double> g(mesh->size(), 1.0);
        if (t > 0) {
            // nonnegative mixture of a floor, bumps in log r and node noise
            const double floor = U(rng) < 0.5 ? 0.0 : U(rng);
            const double centre = std::log(P.epsilon) + U(rng) * (std::log(P.R) - std::log(P.epsilon));
            const double width = 0.2 + 2.0 * U(rng);
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double z = (std::log(mesh->r[i]) - centre) / width;
                g[i] = floor + std::exp(-z * z) + 0.1 * U(rng);
            }
        }
        const auto w = lu.solve(op.rhs(g));
        double mx = 0.0, mabs = 0.0;
        for (double v : w) {
            mx = std::max(mx, v);
            mabs = std::max(mabs, std::abs(v));
        }
        const double rel = mabs > 0.0 ? mx / mabs : 0.0;
        rep.worst_positive = std::max(rep.worst_positive, rel);
        if (rel > kSignTolerance) ++rep.violations;
        ++rep.trials;
    }
    return rep;
}

// ------------------------------------------------------------------ Hardy

struct HardyReport {
    int trials = 0;
    double max_ratio = 0.0;  ///< largest int (w+)^2/r^2 over int |grad w+|^2
    double constant = 0.0;   ///< 4/(N-2)^2
    bool passed() const { return max_ratio <= constant; }
};

/// (int (w+)^2 / r^2 dx, int |grad w+|^2 dx) on [0, mesh end] by Gauss
/// quadrature on the mesh cells; the sphere area cancels and is dropped.
inline std::array<double, 2> hardy_sides(const RadialMesh& mesh, int N, const std::function<double(double)>& w,
                                         const std::function<double(double)>& dw) {
    double lhs = 0.0, rhs = 0.0;
    auto add = [&](double lo, double hi) {
        lhs += detail::gauss_integral(lo, hi, [&](double r) {
            const double v = std::max(w(r), 0.0);
            return v * v * std::pow(r, N - 3.0);
        });
        rhs += detail::gauss_integral(lo, hi, [&](double r) {
            const double d = w(r) > 0.0 ? dw(r) : 0.0;
            return d * d * std::pow(r, N - 1.0);
        });
    };
    add(0.0, mesh.r.front());
    for (std::size_t i = 0; i + 1 < mesh.size(); ++i) add(mesh.r[i], mesh.r[i + 1]);
    return {lhs, rhs};
}

/// Random trial functions sum_m c_m cos((m - 1/2) pi r / R), which vanish at R.
inline HardyReport hardy_check(const RadialMesh& mesh, int N, int trials, std::uint64_t seed) {
    if (N < 3) throw ValidationError("hardy_check needs N >= 3");
    HardyReport rep;
    rep.constant = 4.0 / ((N - 2.0) * (N - 2.0));
    const double R = mesh.r.back();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::uniform_int_distribution<int> terms(1, 8);
    for (int t = 0; t < trials; ++t) {
        const int M = terms(rng);
        std::vector<double> c(M);
        for (auto& v : c) v = U(rng);
        auto w = [&](double r) {
            double s = 0.0;
            for (int m = 0; m < M; ++m) s += c[m] * std::cos((m + 0.5) * std::numbers::pi * r / R);
            return s;
        };
        auto dw = [&](double r) {
            double s = 0.0;
            for (int m = 0; m < M; ++m) {
                const double k = (m + 0.5) * std::numbers::pi / R;
                s -= c[m] * k * std::sin(k * r);
            }
            return s;
        };
        const auto [lhs, rhs] = hardy_sides(mesh, N, w, dw);
        if (rhs > 0.0) rep.max_ratio = std::max(rep.max_ratio, lhs / rhs);
        ++rep.trials;
    }
    return rep;
}

}  // namespace sylab
