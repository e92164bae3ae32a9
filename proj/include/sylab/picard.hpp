#pragma once

// Fixed-point iteration v -> -G_eps[f_eps + Q(v)] on the ball
// ||v||_{2,0,nu} <= M eps^q, and the report on u = u_bar + v.

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "sylab/error.hpp"
#include "sylab/glue.hpp"
#include "sylab/mode_solver.hpp"

namespace sylab {

struct PicardOptions {
    double M = 0.0;  ///< ball constant; <= 0 means 4 C_0 measured at this epsilon
    double tol = 1e-10;
    int max_iter = 50;
    int non_contraction_limit = 3;
};

struct IterationRecord {
    int k = 0;
    double increment = 0.0;    ///< d_k = ||v_{k+1} - v_k||_{2,0,nu}
    double contraction = 0.0;  ///< c_k = d_k / d_{k-1} (0 for k = 0)
    double v_norm = 0.0;       ///< ||v_{k+1}||_{2,0,nu}
    double ball_margin = 0.0;  ///< 1 - ||v_{k+1}|| / (M eps^q)
};

struct IterationState {
    GlueData glue;
    Linearization lin;
    GridFunction v;
    std::vector<IterationRecord> history;
    double nu = 0.0;
    double q = 0.0;
    double C0 = 0.0;  ///< ||G_eps f_eps||_{2,0,nu} / eps^q
    double M = 0.0;
    double ball_radius = 0.0;
    bool converged = false;
    int iterations = 0;          ///< index of the step that met the tolerance
    double residual = 0.0;       ///< ||f + L v + Q(v)||_{0,0,nu-2} / ||f||_{0,0,nu-2}
    double residual_abs = 0.0;
    double positivity_margin = 0.0;  ///< min of u_bar + v over r < R
    NormReport v_norm;               ///< ||v||_{2,0,nu}
    NormReport v_norm_holder;        ///< ||v||_{2,alpha,nu}, diagnostic
};

namespace detail {

inline GridFunction nonlinear_residual(const IterationState& s) {
    const auto op = assemble_mode(0, s.lin, s.nu);
    const auto Lv = op.apply(s.v.radial());
    const auto Qv = nonlinearity_Q(s.v, s.lin.u_bar, s.lin.coeffs, s.lin.p);
    GridFunction res(s.v.mesh);
    for (std::size_t i = 1; i + 1 < res.size(); ++i) res.radial()[i] = s.glue.f_eps()[i] + Lv[i] + Qv[i];
    return res;
}

}  // namespace detail

/// Picard iteration for v + G_eps[f_eps + Q(v)] = 0 on the given mesh. Throws
/// NumericalError("picard_driver", ...) on ball escape or on
/// `non_contraction_limit` consecutive steps with c_k >= 1.
inline IterationState iterate(const ProblemParams& P, const CoefficientField& c, const ScaledFamily& u_eps,
                              const MeshPtr& mesh, const PicardOptions& opt = {}, bool chi_one = false,
                              const GridFunction* initial = nullptr) {
    IterationState s;
    s.glue = assemble_glue(P, c, u_eps, mesh, chi_one);
    s.lin = linearize(P, c, u_eps, mesh, chi_one);
    s.nu = P.nu;
    s.q = P.q_exponent();
    const double eq = std::pow(P.epsilon, s.q);

    const auto first = apply_green(s.glue.f_eps(), s.lin, P.nu);
    s.C0 = first.norm.total / eq;
    s.M = opt.M > 0.0 ? opt.M : 4.0 * s.C0;
    s.ball_radius = s.M * eq;
    if (first.norm.total > s.ball_radius) {
        std::ostringstream os;
        os << "ball escape at the first step: ||G f_eps|| = " << first.norm.total << " > M eps^q = " << s.ball_radius
           << "; use a larger M or a smaller eps";
        throw NumericalError("picard_driver", os.str());
    }

    s.v = initial ? *initial : GridFunction(mesh);
    double prev = 0.0;
    int bad = 0;
    for (int k = 0; k < opt.max_iter; ++k) {
        auto F = s.glue.f_eps();
        F += nonlinearity_Q(s.v, s.lin.u_bar, c, P.p);
        auto next = apply_green(F, s.lin, P.nu);
        next.v *= -1.0;
        auto diff = next.v;
        diff -= s.v;
        IterationRecord rec;
        rec.k = k;
        rec.increment = weighted_holder_norm(diff, 2, 0.0, P.nu, P.sigma).total;
        rec.v_norm = next.norm.total;
        rec.ball_margin = s.ball_radius > 0.0 ? 1.0 - rec.v_norm / s.ball_radius : 1.0;
        rec.contraction = prev > 0.0 ? rec.increment / prev : 0.0;
        s.history.push_back(rec);
        if (rec.v_norm > s.ball_radius) {
            std::ostringstream os;
            os << "ball escape at iteration " << k << ": ||v|| = " << rec.v_norm << " > M eps^q = " << s.ball_radius
               << "; use a larger M or a smaller eps";
            throw NumericalError("picard_driver", os.str());
        }
        s.v = std::move(next.v);
        if (rec.increment <= opt.tol * std::max(rec.v_norm, s.ball_radius * 1e-12) || rec.increment == 0.0) {
            s.converged = true;
            s.iterations = k;
            break;
        }
        bad = (k > 0 && rec.contraction >= 1.0) ? bad + 1 : 0;
        if (bad >= opt.non_contraction_limit) {
            std::ostringstream os;
            os << "no contraction for " << bad << " consecutive steps (last c_k = " << rec.contraction
               << ", d_k = " << rec.increment << ")";
            throw NumericalError("picard_driver", os.str());
        }
        prev = rec.increment;
    }
    if (!s.converged) {
        throw NumericalError("picard_driver", "no convergence within " + std::to_string(opt.max_iter) + " iterations");
    }

    const auto res = detail::nonlinear_residual(s);
    s.residual_abs = weighted_holder_norm(res, 0, 0.0, P.nu - 2.0, P.sigma).total;
    const double fn = weighted_holder_norm(s.glue.f_eps(), 0, 0.0, P.nu - 2.0, P.sigma).total;
    s.residual = fn > 0.0 ? s.residual_abs / fn : s.residual_abs;
    s.positivity_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < mesh->size(); ++i)
        s.positivity_margin = std::min(s.positivity_margin, s.lin.u_bar[i] + s.v[i]);
    s.v_norm = weighted_holder_norm(s.v, 2, 0.0, P.nu, P.sigma);
    s.v_norm_holder = weighted_holder_norm(s.v, 2, std::min(P.alpha_holder, P.p - 1.0), P.nu, P.sigma);
    return s;
}

struct SolutionReport {
    std::vector<double> rho, u_bar, v, u, scaled_u;  ///< scaled_u = rho^{2/(p-1)} u
    double c_p = 0.0;
    double core_value = 0.0;  ///< rho^{2/(p-1)} u at the innermost node
    double core_radius = 0.0;
    double core_error = 0.0;  ///< |core_value / c_p - 1|
    bool positive = false;
    double min_u = 0.0;
    double ratio_slope = 0.0;  ///< log-log slope of |v|/u_bar toward the core
};

inline SolutionReport solution_report(const IterationState& s) {
    if (!s.converged) throw NumericalError("picard_driver", "solution_report needs a converged state");
    SolutionReport rep;
    const auto& m = *s.v.mesh;
    const double a = blowup_rate(s.lin.p);
    rep.c_p = fowler_constant(s.lin.p, s.lin.N);
    rep.min_u = std::numeric_limits<double>::infinity();
    std::vector<double> x, y;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double r = m.r[i], ub = s.lin.u_bar[i], v = s.v[i], u = ub + v;
        rep.rho.push_back(r);
        rep.u_bar.push_back(ub);
        rep.v.push_back(v);
        rep.u.push_back(u);
        rep.scaled_u.push_back(std::pow(r, a) * u);
        if (i + 1 < m.size()) rep.min_u = std::min(rep.min_u, u);
        if (r < 0.1 * s.glue.epsilon && v != 0.0) {
            x.push_back(r);
            y.push_back(std::abs(v) / ub);
        }
    }
    rep.positive = rep.min_u > 0.0;
    rep.core_radius = m.r.front();
    rep.core_value = rep.scaled_u.front();
    rep.core_error = std::abs(rep.core_value / rep.c_p - 1.0);
    if (x.size() >= 2) rep.ratio_slope = loglog_slope(x, y);
    return rep;
}

/// A random function with ||.||_{2,0,nu} equal to `radius`.
inline GridFunction random_ball_element(const MeshPtr& mesh, double nu, double sigma, double radius,
                                        std::mt19937_64& rng) {
    auto g = random_weighted_function(mesh, nu, sigma, rng, 3);
    const double n2 = weighted_holder_norm(g, 2, 0.0, nu, sigma).total;
    g *= radius / n2;
    return g;
}

struct ContractionRow {
    double epsilon = 0.0;
    double ball_radius = 0.0;
    double factor = 0.0;  ///< max over pairs of ||G(Q v1 - Q v2)|| / ||v1 - v2||
};

/// Empirical Lipschitz factor of v -> G_eps Q(v) on B_{eps,M} for each eps;
/// the same seed gives the same random shapes at every eps.
inline std::vector<ContractionRow> contraction_factor_sweep(const ProblemParams& P, const CoefficientField& c,
                                                            const ProfilePtr& base, double lambda,
                                                            const std::vector<double>& eps_list, double M,
                                                            int pairs, std::uint64_t seed,
                                                            int nodes_per_shell = 32) {
    std::vector<ContractionRow> rows;
    for (double eps : eps_list) {
        ProblemParams Pe = P;
        Pe.epsilon = eps;
        const auto mesh = graded_mesh_for(eps, P.sigma, P.R, nodes_per_shell);
        const auto L = linearize(Pe, c, ScaledFamily{base, eps * lambda}, mesh);
        ContractionRow row;
        row.epsilon = eps;
        row.ball_radius = M * std::pow(eps, Pe.q_exponent());
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> U(0.1, 1.0);
        for (int k = 0; k < pairs; ++k) {
            const auto v1 = random_ball_element(mesh, P.nu, P.sigma, row.ball_radius * U(rng), rng);
            const auto v2 = random_ball_element(mesh, P.nu, P.sigma, row.ball_radius * U(rng), rng);
            auto dv = v1;
            dv -= v2;
            const double den = weighted_holder_norm(dv, 2, 0.0, P.nu, P.sigma).total;
            if (den == 0.0) continue;
            auto dq = nonlinearity_Q(v1, L.u_bar, c, P.p);
            dq -= nonlinearity_Q(v2, L.u_bar, c, P.p);
            const auto g = apply_green(dq, L, P.nu);
            row.factor = std::max(row.factor, g.norm.total / den);
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace sylab
