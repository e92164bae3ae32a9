#pragma once

// Approximate solution u_bar = chi u_eps, its error term
// f_eps = div(a grad u_bar) - a h u_bar + a u_bar^p and the remainder Q.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "sylab/coefficients.hpp"
#include "sylab/error.hpp"
#include "sylab/exponents.hpp"
#include "sylab/grid.hpp"
#include "sylab/radial_profile.hpp"
#include "sylab/weighted_norms.hpp"

namespace sylab {

/// chi = 1 - S((r - sigma/2)/(sigma/2)), S(x) = f(x)/(f(x)+f(1-x)), f(x) = e^{-1/x}.
class Cutoff {
   public:
    explicit Cutoff(double sigma) : sigma_(sigma) {
        if (!(sigma > 0.0)) throw ValidationError("cutoff needs sigma > 0");
    }

    double sigma() const { return sigma_; }
    double value(double r) const { return eval(r)[0]; }
    double d1(double r) const { return eval(r)[1]; }
    double d2(double r) const { return eval(r)[2]; }

    /// (chi, chi', chi'').
    std::array<double, 3> eval(double r) const {
        const double half = 0.5 * sigma_;
        if (r <= half) return {1.0, 0.0, 0.0};
        if (r >= sigma_) return {0.0, 0.0, 0.0};
        const double x = (r - half) / half, dx = 1.0 / half;
        const auto F = bump(x), G = bump(1.0 - x);
        // G as a function of x: G' = -f'(1-x), G'' = f''(1-x)
        const double F0 = F[0], F1 = F[1], F2 = F[2];
        const double G0 = G[0], G1 = -G[1], G2 = G[2];
        const double D = F0 + G0, D1 = F1 + G1;
        const double num = F1 * G0 - F0 * G1;
        const double num1 = F2 * G0 - F0 * G2;
        const double S = F0 / D;
        const double S1 = num / (D * D);
        const double S2 = num1 / (D * D) - 2.0 * num * D1 / (D * D * D);
        return {1.0 - S, -S1 * dx, -S2 * dx * dx};
    }

   private:
    /// f, f', f'' for f(x) = e^{-1/x}; zero below the underflow point.
    static std::array<double, 3> bump(double x) {
        if (x < 2e-3) return {0.0, 0.0, 0.0};
        const double f = std::exp(-1.0 / x), x2 = x * x;
        return {f, f / x2, f * (1.0 / (x2 * x2) - 2.0 / (x2 * x))};
    }

    double sigma_;
};

inline Cutoff build_cutoff(double sigma) { return Cutoff(sigma); }

/// Checks at least 8 nodes in every dyadic shell from sigma down to eps/8.
inline void require_resolved(const RadialMesh& mesh, double epsilon, double sigma) {
    if (mesh.r_min() > epsilon / 8.0) {
        throw ValidationError("under-resolved mesh: r_min=" + std::to_string(mesh.r_min()) + " exceeds eps/8");
    }
    for (double s = sigma; s > epsilon / 8.0; s *= 0.5) {
        int count = 0;
        for (double r : mesh.r) count += (r >= 0.5 * s && r < s);
        if (count < 8) {
            throw ValidationError("under-resolved mesh: shell [" + std::to_string(0.5 * s) + ", " + std::to_string(s) +
                                  ") holds " + std::to_string(count) + " < 8 nodes");
        }
    }
}

/// The three parts of f_eps, kept separately: f = lap + grad - hterm.
struct ErrorTerms {
    GridFunction lap;    ///< a [Laplace(u_bar) + u_bar^p]
    GridFunction grad;   ///< a' u_bar'
    GridFunction hterm;  ///< a h u_bar
    GridFunction f;      ///< lap + grad - hterm
};

struct GlueData {
    MeshPtr mesh;
    GridFunction u_bar;
    GridFunction du_bar;  ///< radial derivative of u_bar
    ErrorTerms terms;
    double q_exponent = 0.0;
    double epsilon = 0.0;
    bool cutoff_disabled = false;

    const GridFunction& f_eps() const { return terms.f; }
};

/// u_bar = chi u_eps; with `chi_one` the cutoff is replaced by 1 (diagnostic mode).
inline GridFunction approximate_solution(const ScaledFamily& u_eps, const Cutoff& chi, const MeshPtr& mesh,
                                         bool chi_one = false) {
    return GridFunction::sample(mesh, [&](double r) { return (chi_one ? 1.0 : chi.value(r)) * u_eps.u(r); });
}

/// f_eps node-wise from analytic u_eps, u_eps' and cutoff derivatives. Inside
/// r <= sigma/2 the bracket Laplace(u) + u^p vanishes and is set to 0.
inline ErrorTerms error_term(const ProblemParams& P, const CoefficientField& c, const ScaledFamily& u_eps,
                             const Cutoff& chi, const MeshPtr& mesh, bool chi_one = false) {
    ErrorTerms t{GridFunction(mesh), GridFunction(mesh), GridFunction(mesh), GridFunction(mesh)};
    const double p = P.p;
    for (std::size_t i = 0; i < mesh->size(); ++i) {
        const double r = mesh->r[i];
        const double u = u_eps.u(r), du = u_eps.du(r);
        const auto X = chi_one ? std::array<double, 3>{1.0, 0.0, 0.0} : chi.eval(r);
        const double ub = X[0] * u;
        const double dub = X[1] * u + X[0] * du;
        double bracket = 0.0;
        if (!chi_one && r > 0.5 * P.sigma && r < P.sigma) {
            const double lap_chi = X[2] + (P.N - 1.0) / r * X[1];
            const double up = std::pow(u, p);
            bracket = -X[0] * up + 2.0 * X[1] * du + u * lap_chi + std::pow(X[0], p) * up;
        }
        const double a = c.a.value(r);
        t.lap.radial()[i] = a * bracket;
        t.grad.radial()[i] = c.a.d1(r) * dub;
        t.hterm.radial()[i] = a * c.h.value(r) * ub;
        t.f.radial()[i] = t.lap[i] + t.grad[i] - t.hterm[i];
    }
    return t;
}

inline GlueData assemble_glue(const ProblemParams& P, const CoefficientField& c, const ScaledFamily& u_eps,
                              const MeshPtr& mesh, bool chi_one = false) {
    require_resolved(*mesh, P.epsilon, P.sigma);
    const Cutoff chi(P.sigma);
    GlueData g;
    g.mesh = mesh;
    g.epsilon = P.epsilon;
    g.cutoff_disabled = chi_one;
    g.u_bar = approximate_solution(u_eps, chi, mesh, chi_one);
    g.du_bar = GridFunction::sample(mesh, [&](double r) {
        const auto X = chi_one ? std::array<double, 3>{1.0, 0.0, 0.0} : chi.eval(r);
        return X[1] * u_eps.u(r) + X[0] * u_eps.du(r);
    });
    g.terms = error_term(P, c, u_eps, chi, mesh, chi_one);
    g.q_exponent = P.q_exponent();
    return g;
}

namespace detail {

/// phi(x) = |1+x|^p - 1 - p x, by the binomial series for |x| <= 1/4.
inline double remainder_phi(double x, double p) {
    if (std::abs(x) <= 0.25) {
        double term = 0.5 * p * (p - 1.0) * x * x, sum = term;
        for (int n = 3; n < 80; ++n) {
            term *= (p - n + 1.0) / n * x;
            sum += term;
            if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
        }
        return sum;
    }
    return std::pow(std::abs(1.0 + x), p) - 1.0 - p * x;
}

}  // namespace detail

/// Q(v) = a [|u_bar + v|^p - u_bar^p - p u_bar^{p-1} v], evaluated as
/// a u_bar^p phi(v/u_bar) to avoid cancellation.
inline double nonlinearity_Q(double v, double u_bar, double a, double p) {
    if (u_bar <= 0.0) return a * std::pow(std::abs(v), p);
    return a * std::pow(u_bar, p) * detail::remainder_phi(v / u_bar, p);
}

inline GridFunction nonlinearity_Q(const GridFunction& v, const GridFunction& u_bar, const CoefficientField& c,
                                   double p) {
    GridFunction q(v.mesh);
    for (std::size_t i = 0; i < v.size(); ++i) {
        q.radial()[i] = nonlinearity_Q(v[i], u_bar[i], c.a.value(v.mesh->r[i]), p);
    }
    return q;
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ValidationError("slope fit needs >= 2 matched points");
    double S = 0, Sx = 0, Sy = 0, Sxx = 0, Sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        S += 1;
        Sx += lx;
        Sy += ly;
        Sxx += lx * lx;
        Sxy += lx * ly;
    }
    return (S * Sxy - Sx * Sy) / (S * Sxx - Sx * Sx);
}

}  // namespace sylab
