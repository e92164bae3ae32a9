#pragma once

// Mode-by-mode discretization of L_eps v = div(a grad v) + a[p u_bar^{p-1} - h] v
// on a graded radial mesh, and the Green map built from tridiagonal solves.

#include <cmath>
#include <numbers>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sylab/coefficients.hpp"
#include "sylab/error.hpp"
#include "sylab/exponents.hpp"
#include "sylab/glue.hpp"
#include "sylab/grid.hpp"
#include "sylab/tridiagonal.hpp"
#include "sylab/weighted_norms.hpp"

namespace sylab {

inline constexpr int kDefaultModeCap = 10;

/// Everything L_eps depends on, sampled on one mesh.
struct Linearization {
    int N = 5;
    double p = 2.0;
    double sigma = 0.5;
    CoefficientField coeffs;
    GridFunction u_bar;
    /// Limit of p rho^2 u_bar^{p-1} at the core: A_p, or 0 when u_bar vanishes.
    double core_potential = 0.0;

    const MeshPtr& mesh() const { return u_bar.mesh; }
};

inline Linearization linearize(const ProblemParams& P, const CoefficientField& c, const ScaledFamily& u_eps,
                               const MeshPtr& mesh, bool chi_one = false) {
    Linearization L{P.N, P.p, P.sigma, c, approximate_solution(u_eps, Cutoff(P.sigma), mesh, chi_one),
                    potential_constant(P.p, P.N)};
    return L;
}

/// The operator with u_bar = 0: div(a grad v) - a h v.
inline Linearization linearize_unperturbed(const ProblemParams& P, const CoefficientField& c, const MeshPtr& mesh) {
    return {P.N, P.p, P.sigma, c, GridFunction(mesh), 0.0};
}

enum class InnerClosure { Frobenius, Dirichlet };

/// Rows are scaled by r_i^2 so that the inverse-square terms stay O(1):
/// row i of `matrix` equals row_scale[i] * (L_eps w)_i at interior nodes.
struct ModeOperator {
    int j = 0;
    MeshPtr mesh;
    Tridiagonal matrix;
    std::vector<double> row_scale;
    InnerClosure inner = InnerClosure::Frobenius;
    double inner_exponent = 0.0;

    /// L_eps w at interior nodes, 0 on the two boundary rows.
    std::vector<double> apply(const std::vector<double>& w) const {
        auto y = matrix.apply(w);
        y.front() = y.back() = 0.0;
        for (std::size_t i = 1; i + 1 < y.size(); ++i) y[i] /= row_scale[i];
        return y;
    }

    /// Right-hand side for L_eps w = f with the given boundary data.
    std::vector<double> rhs(const std::vector<double>& f, double inner_value = 0.0, double outer_value = 0.0) const {
        std::vector<double> b(f.size());
        for (std::size_t i = 1; i + 1 < f.size(); ++i) b[i] = row_scale[i] * f[i];
        b.front() = inner_value;
        b.back() = outer_value;
        return b;
    }
};

/// Discretizes w'' + ((N-1)/r + a'/a) w' - (lambda_j/r^2) w + (p u_bar^{p-1} - h) w, times a,
/// with w(R) = 0 and, at r_min, either w = 0 or w_0 = (r_0/r_1)^e w_1, the discrete
/// form of d/dr(r^{-e} w) = 0 that is exact for r^e.
inline ModeOperator assemble_mode(int j, const Linearization& L, double closure_exponent,
                                  InnerClosure inner = InnerClosure::Frobenius, double potential_scale = 1.0) {
    const auto& m = *L.mesh();
    const std::size_t n = m.size();
    if (n < 3) throw ValidationError("mode operator needs at least 3 nodes");
    ModeOperator op;
    op.j = j;
    op.mesh = L.mesh();
    op.matrix = Tridiagonal(n);
    op.row_scale.assign(n, 1.0);
    op.inner = inner;
    op.inner_exponent = closure_exponent;
    const double lambda = sphere_eigenvalue(j, L.N);
    const auto& ub = L.u_bar.radial();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double r = m.r[i];
        const auto st = central_stencil(m.r[i - 1], r, m.r[i + 1]);
        const double a = L.coeffs.a.value(r);
        const double B = (L.N - 1.0) / r + L.coeffs.a.d1(r) / a;
        const double V = potential_scale * L.p * std::pow(std::max(ub[i], 0.0), L.p - 1.0) - L.coeffs.h.value(r);
        const double s = r * r;
        op.matrix.lower[i] = s * (st.d2[0] + B * st.d1[0]);
        op.matrix.diag[i] = s * (st.d2[1] + B * st.d1[1] + V) - lambda;
        op.matrix.upper[i] = s * (st.d2[2] + B * st.d1[2]);
        op.row_scale[i] = s / a;
    }
    op.matrix.diag[0] = 1.0;
    if (inner == InnerClosure::Frobenius) op.matrix.upper[0] = -std::pow(m.r[0] / m.r[1], closure_exponent);
    op.matrix.diag[n - 1] = 1.0;
    return op;
}

/// Throws when the closure weight sits on Re gamma_j^{+-} of the core model Delta + A/r^2.
inline void require_off_indicial(double weight, double core_potential, int N, int j_max) {
    for (int j = 0; j <= j_max; ++j) {
        const auto r = euler_roots(core_potential, sphere_eigenvalue(j, N), N);
        for (const auto& g : {r.minus, r.plus}) {
            if (std::abs(weight - g.real()) < kRootExclusion) {
                std::ostringstream os;
                os.precision(17);
                os << "weight " << weight << " coincides with indicial root Re gamma_" << j << " = " << g.real()
                   << "; the weighted problem is not invertible there";
                throw SingularSystemError(j, std::numeric_limits<double>::infinity(), os.str());
            }
        }
    }
}

struct GreenSolution {
    GridFunction v;
    NormReport norm;  ///< ||v||_{2,0,weight}
    std::vector<double> condition;  ///< per-mode condition estimates
};

/// Solves L_eps v = f channel by channel (channel j = mode j) with v(R) = 0 and the
/// Frobenius closure at the target weight.
inline GreenSolution apply_green(const GridFunction& f, const Linearization& L, double weight) {
    if (f.mesh != L.mesh()) throw ValidationError("apply_green: right-hand side lives on a different mesh");
    const int J = int(f.channel_count()) - 1;
    require_off_indicial(weight, L.core_potential, L.N, J);
    GreenSolution out{GridFunction(f.mesh, f.channel_count()), {}, {}};
    for (int j = 0; j <= J; ++j) {
        const auto& fj = f.channels[j];
        bool zero = true;
        for (double v : fj) zero = zero && v == 0.0;
        if (zero && j > 0) {
            out.condition.push_back(0.0);
            continue;
        }
        const auto op = assemble_mode(j, L, weight);
        const TridiagonalLU lu(op.matrix, j);
        out.v.channels[j] = lu.solve(op.rhs(fj));
        out.condition.push_back(lu.condition_estimate());
    }
    out.norm = weighted_holder_norm(out.v, 2, 0.0, weight, L.sigma);
    return out;
}

/// A smooth random function of log r times r^{weight}, normalized to unit
/// ||.||_{0,0,weight}.
inline GridFunction random_weighted_function(const MeshPtr& mesh, double weight, double sigma, std::mt19937_64& rng,
                                             int harmonics = 4) {
    std::uniform_real_distribution<double> amp(-1.0, 1.0), phase(0.0, 2.0 * std::numbers::pi);
    std::vector<double> c(harmonics), ph(harmonics);
    for (int k = 0; k < harmonics; ++k) {
        c[k] = amp(rng) / (k + 1);
        ph[k] = phase(rng);
    }
    const double c0 = amp(rng);
    auto g = GridFunction::sample(mesh, [&](double r) {
        const double t = std::log(r);
        double s = c0;
        for (int k = 0; k < harmonics; ++k) s += c[k] * std::cos(0.7 * (k + 1) * t + ph[k]);
        return std::pow(r, weight) * s;
    });
    const double nrm = weighted_holder_norm(g, 0, 0.0, weight, sigma).total;
    if (nrm > 0.0) g *= 1.0 / nrm;
    return g;
}

/// max over random unit-norm f in C^0_{nu-2} of ||G_eps f||_{0,0,nu}.
inline double green_norm_probe(const Linearization& L, double nu, int sample_count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int s = 0; s < sample_count; ++s) {
        const auto f = random_weighted_function(L.mesh(), nu - 2.0, L.sigma, rng);
        const auto sol = apply_green(f, L, nu);
        worst = std::max(worst, weighted_holder_norm(sol.v, 0, 0.0, nu, L.sigma).total);
    }
    return worst;
}

/// p u_bar^{p-1} rho^2 / A_p at node i; tends to 1 toward the core.
inline double potential_ratio(const Linearization& L, std::size_t i) {
    const double r = L.mesh()->r[i];
    return L.p * std::pow(L.u_bar[i], L.p - 1.0) * r * r / potential_constant(L.p, L.N);
}

}  // namespace sylab
