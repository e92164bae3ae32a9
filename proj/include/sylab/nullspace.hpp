#pragma once

// Homogeneous solutions of the mode equations near the core and at
// infinity (nullspace scans) and the weighted L^2 stability probe for
// Delta + d/|x|^2.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "sylab/exponents.hpp"
#include "sylab/mode_solver.hpp"
#include "sylab/radial_profile.hpp"

namespace sylab {

// ------------------------------------------------------------- nullspace scan

/// L1 = Delta + p u_1^{p-1}; ModelAp = Delta + A_p/r^2; Laplace = Delta.
enum class NullspaceModel { L1, ModelAp, Laplace };

inline NullspaceModel parse_nullspace_model(const std::string& s) {
    if (s == "L1" || s == "l1") return NullspaceModel::L1;
    if (s == "model_Ap" || s == "model_ap" || s == "Ap") return NullspaceModel::ModelAp;
    if (s == "laplace" || s == "Laplace") return NullspaceModel::Laplace;
    throw ValidationError("unknown nullspace model '" + s + "' (L1 | model_Ap | laplace)");
}

struct ModeScan {
    int j = 0;
    double lambda = 0.0;
    RootPair core_roots;
    RootPair far_roots;
    int admissible = 0;  ///< core branches bounded by rho^gamma
    int growing = 0;     ///< far branches growing faster than rho^gamma
    double mismatch = 1.0;
    bool vacuous = false;  ///< no admissible branch at the core
};

struct NullspaceReport {
    double gamma = 0.0;
    std::vector<ModeScan> modes;
    double min_mismatch = 1.0;
    /// Frequency of the mode-0 oscillation in log r near the core (0 if the
    /// core roots are real).
    double oscillation_frequency = 0.0;
};

namespace detail {

struct ScanOde {
    int N;
    double lambda;
    std::function<double(double)> potential;  ///< r^2 V as a function of t = log r

    std::array<double, 2> rhs(double t, const std::array<double, 2>& y) const {
        return {y[1], -(N - 2.0) * y[1] + (lambda - potential(t)) * y[0]};
    }

    /// Classical RK4 from t0 to t1; optionally records sign changes of y[0].
    std::array<double, 2> integrate(std::array<double, 2> y, double t0, double t1, double h,
                                    std::vector<double>* zeros = nullptr) const {
        const int steps = int(std::ceil(std::abs(t1 - t0) / h));
        const double dt = (t1 - t0) / steps;
        double t = t0;
        for (int s = 0; s < steps; ++s) {
            const auto k1 = rhs(t, y);
            const auto k2 = rhs(t + 0.5 * dt, {y[0] + 0.5 * dt * k1[0], y[1] + 0.5 * dt * k1[1]});
            const auto k3 = rhs(t + 0.5 * dt, {y[0] + 0.5 * dt * k2[0], y[1] + 0.5 * dt * k2[1]});
            const auto k4 = rhs(t + dt, {y[0] + dt * k3[0], y[1] + dt * k3[1]});
            const std::array<double, 2> yn{y[0] + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
                                           y[1] + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
            if (zeros && yn[0] * y[0] < 0.0) zeros->push_back(t + dt * y[0] / (y[0] - yn[0]));
            y = yn;
            t += dt;
            // the equation is linear; keep the state in range
            const double m = std::max(std::abs(y[0]), std::abs(y[1]));
            if (m > 1e100) y = {y[0] / m, y[1] / m};
        }
        return y;
    }
};

/// Basis (value, t-derivative) at the matching point for the two branches of a
/// root pair: e^{g t}, or e^{a t} cos/sin(b t), or e^{g t}, t e^{g t}.
inline std::array<std::array<double, 2>, 2> branch_data(const RootPair& r) {
    if (r.degenerate) return {{{1.0, r.plus.real()}, {0.0, 1.0}}};
    if (std::abs(r.plus.imag()) > 0.0) {
        const double a = r.plus.real(), b = std::abs(r.plus.imag());
        return {{{1.0, a}, {0.0, b}}};
    }
    return {{{1.0, r.minus.real()}, {1.0, r.plus.real()}}};
}

inline std::array<double, 2> branch_real_parts(const RootPair& r) {
    if (r.degenerate || std::abs(r.plus.imag()) > 0.0) return {r.plus.real(), r.plus.real()};
    return {r.minus.real(), r.plus.real()};
}

}  // namespace detail

/// For each mode j <= j_max: integrate the homogeneous equation in t = log r
/// outward from the core branches bounded by r^gamma and measure, at the far end,
/// the smallest relative weight they put on branches growing faster than
/// r^gamma (smallest singular value over unit combinations). A value near 0
/// signals a solution bounded by r^gamma at both ends. `profile` is needed for
/// the L1 model. With `allow_indicial` the root-proximity check is skipped
/// (negative controls).
inline NullspaceReport nullspace_scan(double gamma, double p, int N, NullspaceModel model, int j_max,
                                      const ProfilePtr& profile = nullptr, bool allow_indicial = false) {
    require_exponent_window(p, N);
    const double Ap = potential_constant(p, N);
    const double core_A = model == NullspaceModel::Laplace ? 0.0 : Ap;
    const double far_A = model == NullspaceModel::ModelAp ? Ap : 0.0;
    if (model == NullspaceModel::L1 && !profile) throw ValidationError("the L1 model needs a solved profile");
    if (!allow_indicial) {
        for (int j = 0; j <= j_max; ++j) {
            const auto r = euler_roots(core_A, sphere_eigenvalue(j, N), N);
            for (const auto& g : {r.minus, r.plus}) {
                if (std::abs(gamma - g.real()) < kRootExclusion) {
                    std::ostringstream os;
                    os.precision(17);
                    os << "gamma = " << gamma << " is within 1e-9 of the indicial root Re gamma_" << j << " = "
                       << g.real();
                    throw ValidationError(os.str());
                }
            }
        }
    }
    double t0 = -10.0, t1 = 10.0;
    std::function<double(double)> V = [core_A](double) { return core_A; };
    if (model == NullspaceModel::Laplace) V = [](double) { return 0.0; };
    if (model == NullspaceModel::L1) {
        t0 = -30.0;
        t1 = 25.0;
        V = [profile, p](double t) { return p * std::pow(std::max(profile->fowler_w(t), 0.0), p - 1.0); };
    }
    const double h = 2e-3;
    const double tol = 1e-12;

    NullspaceReport rep;
    rep.gamma = gamma;
    for (int j = 0; j <= j_max; ++j) {
        ModeScan ms;
        ms.j = j;
        ms.lambda = sphere_eigenvalue(j, N);
        ms.core_roots = euler_roots(core_A, ms.lambda, N);
        ms.far_roots = euler_roots(far_A, ms.lambda, N);
        const detail::ScanOde ode{N, ms.lambda, V};

        const auto core_data = detail::branch_data(ms.core_roots);
        const auto core_re = detail::branch_real_parts(ms.core_roots);
        const auto far_data = detail::branch_data(ms.far_roots);
        const auto far_re = detail::branch_real_parts(ms.far_roots);

        // coefficients of each admissible core branch in the far basis
        std::vector<Eigen::Vector2d> cols;
        for (int b = 0; b < 2; ++b) {
            const bool zeros_wanted = j == 0 && b == 0 && std::abs(ms.core_roots.plus.imag()) > 0.0;
            std::vector<double> zeros;
            const auto y = ode.integrate(core_data[b], t0, t1, h, zeros_wanted ? &zeros : nullptr);
            if (zeros_wanted) {
                // only the stretch where the core model is accurate
                std::vector<double> z;
                for (double t : zeros)
                    if (model != NullspaceModel::L1 || t < -10.0) z.push_back(t);
                if (z.size() >= 2) rep.oscillation_frequency = std::numbers::pi * (z.size() - 1) / (z.back() - z.front());
            }
            if (core_re[b] < gamma - tol) continue;
            Eigen::Matrix2d B;
            B << far_data[0][0], far_data[1][0], far_data[0][1], far_data[1][1];
            Eigen::Vector2d c = B.fullPivLu().solve(Eigen::Vector2d(y[0], y[1]));
            cols.push_back(c);
        }
        ms.admissible = int(cols.size());
        std::vector<int> grow_rows;
        for (int b = 0; b < 2; ++b)
            if (far_re[b] > gamma + tol) grow_rows.push_back(b);
        ms.growing = int(grow_rows.size());

        if (ms.admissible == 0) {
            ms.mismatch = 1.0;
            ms.vacuous = true;
        } else if (ms.growing == 0 || ms.admissible > ms.growing) {
            ms.mismatch = 0.0;
        } else {
            Eigen::MatrixXd C(2, ms.admissible);
            for (int k = 0; k < ms.admissible; ++k) C.col(k) = cols[k];
            const Eigen::MatrixXd Q = C.householderQr().householderQ() * Eigen::MatrixXd::Identity(2, ms.admissible);
            Eigen::MatrixXd G(ms.growing, ms.admissible);
            for (int r = 0; r < ms.growing; ++r) G.row(r) = Q.row(grow_rows[r]);
            ms.mismatch = Eigen::JacobiSVD<Eigen::MatrixXd>(G).singularValues().minCoeff();
        }
        rep.min_mismatch = j == 0 ? ms.mismatch : std::min(rep.min_mismatch, ms.mismatch);
        rep.modes.push_back(ms);
    }
    return rep;
}

// --------------------------------------------------------- stability probe

struct StabilityLevel {
    double r_min = 0.0;
    int nodes_per_shell = 0;
    double u_norm = 0.0;      ///< ||u||_{L^2_delta(B_1)}
    double f_norm = 0.0;      ///< ||f||_{L^2_{delta-2}(B_1)}
    double outer_norm = 0.0;  ///< ||u||_{L^2(B_1 \ B_1/2)}
    double ratio = 0.0;
};

struct StabilityReport {
    double d = 0.0;
    double delta = 0.0;
    double nearest_indicial = 0.0;  ///< distance of delta to the set {+-delta_j}
    std::vector<StabilityLevel> levels;
    bool vacuous = false;
    double variation = 0.0;  ///< max/min - 1 over the last three levels
    bool passed() const { return vacuous || (levels.size() >= 3 && variation < 0.5); }
};

inline constexpr double kStabilityExclusion = 0.05;

/// Distance of delta to {+-delta_j : j <= j_max}.
inline double delta_distance(double delta, double d, int N, int j_max = kDefaultModeCap) {
    double m = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= j_max; ++j) {
        const double dj = delta_exponent(d, N, j);
        m = std::min({m, std::abs(delta - dj), std::abs(delta + dj)});
    }
    return m;
}

/// Manufactured pair u = A r^e chi(r), f = (Delta + d/r^2) u in mode j on B_1,
/// chi the unit-radius cutoff. On each level the mode equation is solved
/// numerically on a graded mesh with u(r_min) taken from u and u(1) = 0, and
/// the ratio ||u||_{L^2_delta} / (||f||_{L^2_{delta-2}} + ||u||_{L^2(B_1 \ B_1/2)})
/// is recorded. Level k uses r_min = 2^{-(6+4k)} and 8 * 2^k nodes per shell.
inline StabilityReport appendix_stability_probe(double d, double delta, int N, double exponent, int levels = 5,
                                                int j = 0, double amplitude = 1.0) {
    StabilityReport rep;
    rep.d = d;
    rep.delta = delta;
    rep.nearest_indicial = delta_distance(delta, d, N);
    if (rep.nearest_indicial < kStabilityExclusion) {
        std::ostringstream os;
        os.precision(17);
        os << "delta = " << delta << " lies within " << kStabilityExclusion
           << " of an indicial value +-delta_j (distance " << rep.nearest_indicial
           << "); the weighted estimate fails there";
        throw ValidationError(os.str());
    }
    if (amplitude == 0.0) {
        rep.vacuous = true;
        return rep;
    }
    const Cutoff chi(1.0);
    const double lam = sphere_eigenvalue(j, N);
    auto u = [&](double r) { return amplitude * std::pow(r, exponent) * chi.value(r); };
    auto f = [&](double r) {
        const auto X = chi.eval(r);
        const double e = exponent, pw = std::pow(r, e);
        const double u0 = pw * X[0];
        const double u1 = e * pw / r * X[0] + pw * X[1];
        const double u2 = e * (e - 1.0) * pw / (r * r) * X[0] + 2.0 * e * pw / r * X[1] + pw * X[2];
        return amplitude * (u2 + (N - 1.0) / r * u1 + (d - lam) / (r * r) * u0);
    };
    CoefficientField flat;
    flat.h = RadialFunction::constant(0.0);
    for (int k = 0; k < levels; ++k) {
        StabilityLevel lv;
        lv.r_min = std::ldexp(1.0, -(6 + 4 * k));
        lv.nodes_per_shell = 8 << k;
        const auto mesh = graded_mesh(lv.r_min, 0.5, 1.0, lv.nodes_per_shell);
        // Delta + d/r^2 is L_eps with a = 1, h = -d/r^2 folded into the potential slot
        Linearization L{N, 2.0, 0.5, flat, GridFunction(mesh), d};
        auto op = assemble_mode(j, L, 0.0, InnerClosure::Dirichlet);
        for (std::size_t i = 1; i + 1 < mesh->size(); ++i) op.matrix.diag[i] += d;
        // D^{-1} A D with D = diag(r_i^e): unknowns and rows stay O(1) across many decades
        const std::size_t n = mesh->size();
        std::vector<double> col(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = std::pow(mesh->r[i], exponent);
        for (std::size_t i = 0; i < n; ++i) {
            if (i > 0) op.matrix.lower[i] *= col[i - 1] / col[i];
            if (i + 1 < n) op.matrix.upper[i] *= col[i + 1] / col[i];
        }
        const auto fg = GridFunction::sample(mesh, f);
        const TridiagonalLU lu(op.matrix, j);
        auto z = op.rhs(fg.radial(), u(lv.r_min), 0.0);
        for (std::size_t i = 0; i < n; ++i) z[i] /= col[i];
        z = lu.solve(std::move(z));
        for (std::size_t i = 0; i < n; ++i) z[i] *= col[i];
        const GridFunction uh(mesh, std::move(z));
        lv.u_norm = weighted_l2_norm(uh, delta, N);
        lv.f_norm = weighted_l2_norm(fg, delta - 2.0, N);
        lv.outer_norm = weighted_l2_norm(uh, -1.0, N, 0.5, 1.0);
        lv.ratio = lv.u_norm / (lv.f_norm + lv.outer_norm);
        rep.levels.push_back(lv);
    }
    if (rep.levels.size() >= 3) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (std::size_t k = rep.levels.size() - 3; k < rep.levels.size(); ++k) {
            lo = std::min(lo, rep.levels[k].ratio);
            hi = std::max(hi, rep.levels[k].ratio);
        }
        rep.variation = hi / lo - 1.0;
    }
    return rep;
}

}  // namespace sylab
