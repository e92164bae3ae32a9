#pragma once

// Closed-form exponent algebra: critical exponents, Fowler constants,
// indicial roots at the origin and at infinity, the admissible weight
// window and the equivariant admissibility gate.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "sylab/error.hpp"

namespace sylab {

using complex = std::complex<double>;

/// Margin by which weights must stay away from indicial roots.
inline constexpr double kRootExclusion = 1e-9;

/// Relative size of the discriminant below which a double root is flagged.
inline constexpr double kDegenerateDiscriminant = 1e-9;

inline double subcritical_lower(int N) { return double(N) / (N - 2); }
inline double subcritical_upper(int N) { return double(N + 2) / (N - 2); }

inline bool in_exponent_window(double p, int N) {
    return N >= 3 && p > subcritical_lower(N) && p < subcritical_upper(N);
}

inline void require_exponent_window(double p, int N) {
    if (N < 3) {
        throw ValidationError("dimension N=" + std::to_string(N) + " violates N >= 3");
    }
    if (!in_exponent_window(p, N)) {
        std::ostringstream os;
        os.precision(17);
        os << "exponent p=" << p << " violates N/(N-2) < p < (N+2)/(N-2) for N=" << N
           << " (window " << subcritical_lower(N) << " < p < " << subcritical_upper(N) << ")";
        throw ValidationError(os.str());
    }
}

/// Blow-up rate 2/(p-1) of the singular profile at the origin.
inline double blowup_rate(double p) { return 2.0 / (p - 1.0); }

/// Exponent N-2-2/(p-1) by which the tail coefficient scales under u -> u_eps.
inline double tail_scaling_exponent(double p, int N) { return N - 2.0 - blowup_rate(p); }

/// k(p,N) = 2/(p-1) (N - 2p/(p-1)).
inline double k_constant(double p, int N) {
    require_exponent_window(p, N);
    return blowup_rate(p) * (N - 2.0 * p / (p - 1.0));
}

/// c_p = k(p,N)^{1/(p-1)}, the limit of r^{2/(p-1)} u(r) at the origin.
inline double fowler_constant(double p, int N) {
    return std::pow(k_constant(p, N), 1.0 / (p - 1.0));
}

/// A_p = p k(p,N), the coefficient of the inverse-square potential at the core.
inline double potential_constant(double p, int N) { return p * k_constant(p, N); }

/// j-th distinct eigenvalue of -Laplacian on S^{N-1}.
inline double sphere_eigenvalue(int j, int N) { return double(j) * (j + N - 2); }

struct RootPair {
    complex minus;
    complex plus;
    bool degenerate = false;
};

/// Roots of gamma^2 + (N-2) gamma + (potential - lambda) = 0.
inline RootPair euler_roots(double potential, double lambda, int N) {
    const double disc = (N - 2.0) * (N - 2.0) + 4.0 * (lambda - potential);
    const complex s = std::sqrt(complex(disc, 0.0));
    RootPair r;
    r.minus = 0.5 * (complex(2.0 - N, 0.0) - s);
    r.plus = 0.5 * (complex(2.0 - N, 0.0) + s);
    r.degenerate = std::abs(disc) <= kDegenerateDiscriminant * std::max(1.0, (N - 2.0) * (N - 2.0));
    return r;
}

/// gamma_j^{+-} of L_1 = Delta + p u_1^{p-1} at the origin.
inline RootPair indicial_roots_origin(double p, int N, int j) {
    return euler_roots(potential_constant(p, N), sphere_eigenvalue(j, N), N);
}

/// Real roots of the Laplacian (the operator at infinity).
struct RealRootPair {
    double minus;
    double plus;
};

inline RealRootPair indicial_roots_infinity(int N, int j) {
    const auto r = euler_roots(0.0, sphere_eigenvalue(j, N), N);
    return {r.minus.real(), r.plus.real()};
}

/// delta_j = Re sqrt(((N-2)/2)^2 + lambda_j - d).
inline double delta_exponent(double d, int N, int j) {
    const double h = 0.5 * (N - 2.0);
    return std::sqrt(complex(h * h + sphere_eigenvalue(j, N) - d, 0.0)).real();
}

struct IndicialEntry {
    int j = 0;
    double lambda = 0.0;
    complex gamma_minus;
    complex gamma_plus;
    bool degenerate = false;
    double gamma_inf_minus = 0.0;
    double gamma_inf_plus = 0.0;
    double delta = 0.0;
};

struct IndicialTable {
    double p = 0.0;
    int N = 0;
    double A_p = 0.0;
    double shift_d = 0.0;
    std::vector<IndicialEntry> entries;

    bool any_degenerate() const {
        return std::any_of(entries.begin(), entries.end(), [](const auto& e) { return e.degenerate; });
    }
};

/// Table for modes 0..j_max; delta_j uses the shift d (defaults to A_p).
inline IndicialTable indicial_table(double p, int N, int j_max, double shift_d) {
    IndicialTable t;
    t.p = p;
    t.N = N;
    t.A_p = potential_constant(p, N);
    t.shift_d = shift_d;
    for (int j = 0; j <= j_max; ++j) {
        IndicialEntry e;
        e.j = j;
        e.lambda = sphere_eigenvalue(j, N);
        const auto r = euler_roots(t.A_p, e.lambda, N);
        e.gamma_minus = r.minus;
        e.gamma_plus = r.plus;
        e.degenerate = r.degenerate;
        const auto inf = indicial_roots_infinity(N, j);
        e.gamma_inf_minus = inf.minus;
        e.gamma_inf_plus = inf.plus;
        e.delta = delta_exponent(shift_d, N, j);
        t.entries.push_back(e);
    }
    return t;
}

inline IndicialTable indicial_table(double p, int N, int j_max) {
    return indicial_table(p, N, j_max, potential_constant(p, N));
}

/// The ordering 2-N < -2/(p-1) < Re g0- <= (2-N)/2 <= Re g0+ < 0 and
/// g_j- < -2/(p-1) for 1 <= j <= j_max.
inline bool indicial_chain_holds(double p, int N, int j_max) {
    const double a = blowup_rate(p);
    const auto g0 = indicial_roots_origin(p, N, 0);
    const double half = 0.5 * (2.0 - N);
    bool ok = (2.0 - N < -a) && (-a < g0.minus.real()) && (g0.minus.real() <= half + 1e-15) &&
              (half <= g0.plus.real() + 1e-15) && (g0.plus.real() < 0.0);
    for (int j = 1; j <= j_max && ok; ++j) {
        ok = indicial_roots_origin(p, N, j).minus.real() < -a;
    }
    return ok;
}

struct WeightWindow {
    double nu_lo = 0.0;
    double nu_hi = 0.0;
    int N = 0;

    double mu_for(double nu) const { return 2.0 - N - nu; }
    bool contains(double nu) const { return nu > nu_lo && nu < nu_hi; }
    bool empty() const { return !(nu_lo < nu_hi); }
    double midpoint() const { return 0.5 * (nu_lo + nu_hi); }
};

inline WeightWindow weight_window(double p, int N) {
    require_exponent_window(p, N);
    const double a = blowup_rate(p);
    const auto g0 = indicial_roots_origin(p, N, 0);
    WeightWindow w;
    w.N = N;
    w.nu_lo = -a;
    w.nu_hi = std::min(-a + 1.0, g0.minus.real());
    if (w.empty()) {
        throw ValidationError("empty weight window for p=" + std::to_string(p) + ", N=" + std::to_string(N));
    }
    return w;
}

/// Distance of a weight from the real parts of all indicial roots for modes 0..j_max
/// (origin roots and, when `include_infinity`, the Laplacian roots).
inline double indicial_distance(double gamma, double p, int N, int j_max, bool include_infinity = false) {
    double d = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= j_max; ++j) {
        const auto r = indicial_roots_origin(p, N, j);
        d = std::min({d, std::abs(gamma - r.minus.real()), std::abs(gamma - r.plus.real())});
        if (include_infinity) {
            const auto q = indicial_roots_infinity(N, j);
            d = std::min({d, std::abs(gamma - q.minus), std::abs(gamma - q.plus)});
        }
    }
    return d;
}

/// Checks every inequality of the (nu, mu) window; throws naming the first violated one.
inline void validate_weights(double p, int N, double nu, double mu, int j_max = 10) {
    const auto w = weight_window(p, N);
    const auto g0 = indicial_roots_origin(p, N, 0);
    auto fail = [&](const std::string& which) {
        std::ostringstream os;
        os.precision(17);
        os << "weights nu=" << nu << ", mu=" << mu << " violate " << which;
        throw ValidationError(os.str());
    };
    if (!(nu > w.nu_lo)) fail("-2/(p-1) < nu");
    if (!(nu < w.nu_hi)) fail("nu < min{-2/(p-1)+1, Re gamma_0^-}");
    if (!(g0.plus.real() < mu)) fail("Re gamma_0^+ < mu");
    if (!(mu < 0.0)) fail("mu < 0");
    if (std::abs(mu + nu - (2.0 - N)) > 1e-12) fail("mu + nu = 2 - N");
    if (indicial_distance(nu, p, N, j_max) < kRootExclusion) fail("nu away from indicial roots");
    if (indicial_distance(mu, p, N, j_max) < kRootExclusion) fail("mu away from indicial roots");
}

struct EquivariantSpec {
    int n = 0;
    int k = 0;
    int N = 0;
    double p = 0.0;
    bool admissible = false;
    /// 2*_{n,k} = 2(n-k)/(n-k-2).
    double critical_exponent = 0.0;
};

inline EquivariantSpec equivariant_params(int n, int k) {
    if (n < 3 || k < 1) {
        throw ValidationError("equivariant reduction needs n >= 3 and k >= 1");
    }
    if (n - k <= 2) {
        throw ValidationError("reduced dimension n-k=" + std::to_string(n - k) + " violates n-k > 2");
    }
    EquivariantSpec s;
    s.n = n;
    s.k = k;
    s.N = n - k;
    s.p = double(n + 2) / (n - 2);
    s.admissible = 0 < k && 2 * k < n - 2;
    s.critical_exponent = 2.0 * (n - k) / (n - k - 2.0);
    return s;
}

/// Global configuration read by every stage.
struct ProblemParams {
    int N = 5;
    double p = 2.0;
    double beta = 1.0;
    double epsilon = 0.005;
    double sigma = 0.5;
    double R = 1.0;
    double alpha_holder = 0.5;
    double nu = -1.75;
    double mu = -1.25;

    void validate() const {
        require_exponent_window(p, N);
        if (!(beta > 0.0)) throw ValidationError("beta > 0 violated");
        if (!(epsilon > 0.0 && epsilon < 0.5 * sigma && sigma < R)) {
            throw ValidationError("0 < epsilon < sigma/2 < sigma < R violated");
        }
        if (!(alpha_holder > 0.0 && alpha_holder <= 1.0)) {
            throw ValidationError("alpha_holder in (0,1] violated");
        }
        if (alpha_holder > p - 1.0) throw ValidationError("alpha_holder <= p-1 violated");
        validate_weights(p, N, nu, mu);
    }

    double a() const { return blowup_rate(p); }

    /// q = min{N - 2p/(p-1), 1 - nu - 2/(p-1)}.
    double q_exponent() const {
        return std::min(N - 2.0 * p / (p - 1.0), 1.0 - nu - blowup_rate(p));
    }
};

}  // namespace sylab
