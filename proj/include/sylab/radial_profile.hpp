#pragma once

// Singular radial solution of -Laplace(u) = u^p in R^N minus the origin,
// computed in Fowler variables u(r) = r^{-a} w(log r), a = 2/(p-1):
//
//   w'' + b w' - k w + w^p = 0,   b = N - 2 - 2a,   k = a (N - 2 - a).
//
// The connection runs from the spiral/node at w = c_p (t -> -inf) to the
// decaying branch w ~ beta e^{(a+2-N) t} (t -> +inf).

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "sylab/error.hpp"
#include "sylab/exponents.hpp"
#include "sylab/grid.hpp"

namespace sylab {

struct FowlerCoefficients {
    double p = 0.0;
    int N = 0;
    double a = 0.0;  ///< blow-up rate 2/(p-1)
    double b = 0.0;  ///< damping N-2-2a
    double k = 0.0;
    double c_p = 0.0;
    double s_decay = 0.0;  ///< a+2-N, the tail exponent in t

    FowlerCoefficients() = default;
    FowlerCoefficients(double p_, int N_) : p(p_), N(N_) {
        k = k_constant(p, N);
        a = blowup_rate(p);
        b = N - 2.0 - 2.0 * a;
        c_p = fowler_constant(p, N);
        s_decay = a + 2.0 - N;
    }

    /// Second-order coefficient of the tail expansion w = y + C y^p, y = beta e^{s t}.
    double tail_correction() const {
        const double s = p * s_decay;
        return -1.0 / (s * s + b * s - k);
    }
};

/// w'' from the autonomous Fowler equation.
inline double fowler_rhs(double w, double w_prime, double p, int N) {
    const FowlerCoefficients c(p, N);
    return -c.b * w_prime + c.k * w - std::pow(std::abs(w), p);
}

struct ConnectionOptions {
    double t_minus = -25.0;
    double t_plus = 15.0;
    int nodes = 4000;
    int max_newton = 30;
    double newton_tol = 1e-13;
    /// Push T- below -10/(core rate) when the approach to c_p is slow,
    /// adding nodes to keep the spacing.
    bool extend_core = true;
};

/// Slowest exponential rate at which w -> c_p as t -> -inf.
inline double core_rate(const FowlerCoefficients& c) {
    const double disc = c.b * c.b - 4.0 * (c.p - 1.0) * c.k;
    return disc < 0.0 ? -0.5 * c.b : 0.5 * (-c.b - std::sqrt(disc));
}

struct ProfileDiagnostics {
    std::string method;  ///< "collocation" or "shooting"
    int newton_iterations = 0;
    double collocation_defect = 0.0;  ///< max Hermite-Simpson defect
    double fowler_residual = 0.0;     ///< max five-point residual of the Fowler equation
    double core_gap = 0.0;            ///< |w(T-) - c_p|
    double tail_exponent_fit = 0.0;
    double beta_fit = 0.0;
    double tail_fit_error = 0.0;  ///< max relative misfit of the two-term tail model on the fit window
};

/// Immutable heteroclinic on a uniform t-grid, with asymptotic closed
/// forms outside the grid.
class RadialProfile {
   public:
    RadialProfile(FowlerCoefficients c, std::vector<double> t, std::vector<double> w, std::vector<double> wp,
                  double beta)
        : c_(c), t_(std::move(t)), w_(std::move(w)), wp_(std::move(wp)), beta_(beta) {
        h_ = (t_.back() - t_.front()) / double(t_.size() - 1);
        prepare_core();
        prepare_tail();
    }

    const FowlerCoefficients& coefficients() const { return c_; }
    const std::vector<double>& t_grid() const { return t_; }
    const std::vector<double>& w() const { return w_; }
    const std::vector<double>& w_prime() const { return wp_; }
    double c_p() const { return c_.c_p; }
    double beta() const { return beta_; }
    double p() const { return c_.p; }
    int N() const { return c_.N; }
    double t_minus() const { return t_.front(); }
    double t_plus() const { return t_.back(); }
    const ProfileDiagnostics& diagnostics() const { return diag_; }
    ProfileDiagnostics& diagnostics() { return diag_; }

    struct State {
        double w;
        double wp;
    };

    /// (w, w') at arbitrary t.
    State fowler_state(double t) const {
        if (t < t_.front()) return core_state(t);
        if (t > t_.back()) return tail_state(t);
        std::size_t i = std::min<std::size_t>(std::size_t((t - t_.front()) / h_), t_.size() - 2);
        const double s = (t - t_[i]) / h_;
        const double s2 = s * s, s3 = s2 * s;
        const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
        const double d00 = 6 * s2 - 6 * s, d10 = 3 * s2 - 4 * s + 1, d01 = -6 * s2 + 6 * s, d11 = 3 * s2 - 2 * s;
        State st;
        st.w = h00 * w_[i] + h10 * h_ * wp_[i] + h01 * w_[i + 1] + h11 * h_ * wp_[i + 1];
        st.wp = (d00 * w_[i] + d01 * w_[i + 1]) / h_ + d10 * wp_[i] + d11 * wp_[i + 1];
        return st;
    }

    double fowler_w(double t) const { return fowler_state(t).w; }

    /// u_1(r) = r^{-a} w(log r).
    double u(double r) const { return std::pow(r, -c_.a) * fowler_w(std::log(r)); }

    /// u_1'(r) = r^{-a-1} (w' - a w).
    double du(double r) const {
        const auto st = fowler_state(std::log(r));
        return std::pow(r, -c_.a - 1.0) * (st.wp - c_.a * st.w);
    }

    /// Copy shifted by dt in t; the tail coefficient scales by e^{(N-2-a) dt}.
    RadialProfile translated(double dt) const {
        std::vector<double> t = t_;
        for (auto& x : t) x += dt;
        RadialProfile out(c_, std::move(t), w_, wp_, beta_ * std::exp(-c_.s_decay * dt));
        out.diag_ = diag_;
        out.diag_.beta_fit *= std::exp(-c_.s_decay * dt);
        return out;
    }

   private:
    // Linearization z'' + b z' + (p-1) k z = 0 around c_p, matched at T-.
    void prepare_core() {
        const double q = (c_.p - 1.0) * c_.k;
        const double disc = c_.b * c_.b - 4.0 * q;
        z0_ = w_.front() - c_.c_p;
        z0p_ = wp_.front();
        if (std::abs(disc) <= 1e-12 * std::max(1.0, c_.b * c_.b)) {
            core_kind_ = CoreKind::Double;
            s1_ = -0.5 * c_.b;
        } else if (disc < 0.0) {
            core_kind_ = CoreKind::Spiral;
            s1_ = -0.5 * c_.b;
            s2_ = 0.5 * std::sqrt(-disc);
        } else {
            core_kind_ = CoreKind::Node;
            s1_ = 0.5 * (-c_.b + std::sqrt(disc));
            s2_ = 0.5 * (-c_.b - std::sqrt(disc));
        }
    }

    State core_state(double t) const {
        const double tau = t - t_.front();
        switch (core_kind_) {
            case CoreKind::Spiral: {
                const double A = z0_, B = (z0p_ - s1_ * z0_) / s2_;
                const double e = std::exp(s1_ * tau), cs = std::cos(s2_ * tau), sn = std::sin(s2_ * tau);
                const double z = e * (A * cs + B * sn);
                const double zp = s1_ * z + e * s2_ * (-A * sn + B * cs);
                return {c_.c_p + z, zp};
            }
            case CoreKind::Node: {
                const double C1 = (z0p_ - s2_ * z0_) / (s1_ - s2_);
                const double C2 = z0_ - C1;
                const double e1 = std::exp(s1_ * tau), e2 = std::exp(s2_ * tau);
                return {c_.c_p + C1 * e1 + C2 * e2, s1_ * C1 * e1 + s2_ * C2 * e2};
            }
            case CoreKind::Double:
            default: {
                const double A = z0_, B = z0p_ - s1_ * z0_;
                const double e = std::exp(s1_ * tau);
                return {c_.c_p + (A + B * tau) * e, (s1_ * (A + B * tau) + B) * e};
            }
        }
    }

    void prepare_tail() {
        C_ = c_.tail_correction();
        const double wT = w_.back();
        double y = wT;
        for (int it = 0; it < 4; ++it) y = wT - C_ * std::pow(std::abs(y), c_.p);
        yT_ = y;
    }

    State tail_state(double t) const {
        const double y = yT_ * std::exp(c_.s_decay * (t - t_.back()));
        const double yp = std::pow(std::abs(y), c_.p);
        return {y + C_ * yp, c_.s_decay * y + C_ * c_.p * c_.s_decay * yp};
    }

    enum class CoreKind { Spiral, Node, Double };

    FowlerCoefficients c_;
    std::vector<double> t_, w_, wp_;
    double beta_ = 1.0;
    double h_ = 0.0;
    ProfileDiagnostics diag_;
    CoreKind core_kind_ = CoreKind::Spiral;
    double s1_ = 0.0, s2_ = 0.0, z0_ = 0.0, z0p_ = 0.0;
    double C_ = 0.0, yT_ = 0.0;
};

using ProfilePtr = std::shared_ptr<const RadialProfile>;

namespace detail {

struct FowlerSystem {
    FowlerCoefficients c;

    Eigen::Vector2d F(const Eigen::Vector2d& y) const {
        return {y[1], -c.b * y[1] + c.k * y[0] - std::pow(std::abs(y[0]), c.p)};
    }
    Eigen::Matrix2d J(const Eigen::Vector2d& y) const {
        const double dw = c.k - c.p * std::pow(std::abs(y[0]), c.p - 1.0) * (y[0] < 0 ? -1.0 : 1.0);
        Eigen::Matrix2d m;
        m << 0.0, 1.0, dw, -c.b;
        return m;
    }
};

inline Eigen::Vector2d rk4_step(const FowlerSystem& sys, const Eigen::Vector2d& y, double h) {
    const auto k1 = sys.F(y);
    const auto k2 = sys.F(y + 0.5 * h * k1);
    const auto k3 = sys.F(y + 0.5 * h * k2);
    const auto k4 = sys.F(y + h * k3);
    return y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
}

/// Max Hermite-Simpson defect over all intervals.
inline double hs_defect(const FowlerSystem& sys, const std::vector<Eigen::Vector2d>& Y, double h) {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < Y.size(); ++i) {
        const auto Fi = sys.F(Y[i]), Fj = sys.F(Y[i + 1]);
        const Eigen::Vector2d ym = 0.5 * (Y[i] + Y[i + 1]) + h / 8.0 * (Fi - Fj);
        const Eigen::Vector2d D = Y[i + 1] - Y[i] - h / 6.0 * (Fi + 4.0 * sys.F(ym) + Fj);
        m = std::max(m, D.cwiseAbs().maxCoeff());
    }
    return m;
}

/// Five-point fourth-order residual of the Fowler equation at interior nodes.
inline std::vector<double> fowler_fd_residual(const FowlerCoefficients& c, const std::vector<double>& w, double h) {
    const std::size_t n = w.size();
    std::vector<double> res(n, 0.0);
    for (std::size_t i = 2; i + 2 < n; ++i) {
        const double d2 = (-w[i - 2] + 16 * w[i - 1] - 30 * w[i] + 16 * w[i + 1] - w[i + 2]) / (12 * h * h);
        const double d1 = (w[i - 2] - 8 * w[i - 1] + 8 * w[i + 1] - w[i + 2]) / (12 * h);
        res[i] = d2 + c.b * d1 - c.k * w[i] + std::pow(std::abs(w[i]), c.p);
    }
    return res;
}

}  // namespace detail

/// Canonical connection (tail coefficient 1) translated so the tail
/// coefficient equals beta_target.
inline RadialProfile solve_connection(double p, int N, double beta_target, const ConnectionOptions& opt = {}) {
    require_exponent_window(p, N);
    if (!(beta_target > 0.0)) throw ValidationError("beta > 0 violated");
    if (opt.nodes < 100 || !(opt.t_minus < opt.t_plus)) throw ValidationError("bad connection grid");

    const FowlerCoefficients c(p, N);
    const detail::FowlerSystem sys{c};
    double t_minus = opt.t_minus;
    int n = opt.nodes;
    if (opt.extend_core && -10.0 / core_rate(c) < t_minus) {
        const double h0 = (opt.t_plus - opt.t_minus) / (n - 1);
        t_minus = -10.0 / core_rate(c);
        n = int(std::ceil((opt.t_plus - t_minus) / h0)) + 1;
        if (n > 400000) throw ValidationError("exponent too close to (N+2)/(N-2): core approach too slow");
    }
    const double h = (opt.t_plus - t_minus) / (n - 1);
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i) t[i] = t_minus + h * i;
    t.back() = opt.t_plus;

    // Tail data: w = y + C y^p, y = e^{s T+}.
    const double C = c.tail_correction();
    const double yT = std::exp(c.s_decay * opt.t_plus);
    const double wT = yT + C * std::pow(yT, p);
    const double wpT = c.s_decay * yT + C * p * c.s_decay * std::pow(yT, p);

    std::vector<Eigen::Vector2d> Y(n);
    Y[n - 1] = {wT, wpT};
    for (int i = n - 1; i > 0; --i) Y[i - 1] = detail::rk4_step(sys, Y[i], -h);

    ProfileDiagnostics diag;
    diag.method = "collocation";
    bool converged = false;
    {
        // Newton on the Hermite-Simpson equations; unknowns interleaved (w_i, w'_i).
        std::vector<Eigen::Vector2d> Z = Y;
        const int dim = 2 * n;
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        for (int it = 0; it < opt.max_newton; ++it) {
            std::vector<Eigen::Triplet<double>> trip;
            trip.reserve(8 * dim);
            Eigen::VectorXd G(dim);
            const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
            for (int i = 0; i + 1 < n; ++i) {
                const auto Fi = sys.F(Z[i]), Fj = sys.F(Z[i + 1]);
                const auto Ji = sys.J(Z[i]), Jj = sys.J(Z[i + 1]);
                const Eigen::Vector2d ym = 0.5 * (Z[i] + Z[i + 1]) + h / 8.0 * (Fi - Fj);
                const auto Jm = sys.J(ym);
                const Eigen::Vector2d D = Z[i + 1] - Z[i] - h / 6.0 * (Fi + 4.0 * sys.F(ym) + Fj);
                const Eigen::Matrix2d Ai = -I - h / 6.0 * (Ji + 4.0 * Jm * (0.5 * I + h / 8.0 * Ji));
                const Eigen::Matrix2d Aj = I - h / 6.0 * (Jj + 4.0 * Jm * (0.5 * I - h / 8.0 * Jj));
                G.segment<2>(2 * i) = D;
                for (int r = 0; r < 2; ++r)
                    for (int q = 0; q < 2; ++q) {
                        trip.emplace_back(2 * i + r, 2 * i + q, Ai(r, q));
                        trip.emplace_back(2 * i + r, 2 * (i + 1) + q, Aj(r, q));
                    }
            }
            const int last = 2 * (n - 1);
            const double wl = Z[n - 1][0];
            G[last] = wl - wT;
            trip.emplace_back(last, last, 1.0);
            G[last + 1] = Z[n - 1][1] - wpT;
            trip.emplace_back(last + 1, last + 1, 1.0);

            Eigen::SparseMatrix<double> A(dim, dim);
            A.setFromTriplets(trip.begin(), trip.end());
            if (it == 0) lu.analyzePattern(A);
            lu.factorize(A);
            if (lu.info() != Eigen::Success) break;
            const Eigen::VectorXd dz = lu.solve(-G);
            double step = 0.0;
            for (int i = 0; i < n; ++i) {
                Z[i] += dz.segment<2>(2 * i);
                step = std::max(step, dz.segment<2>(2 * i).cwiseAbs().maxCoeff());
            }
            diag.newton_iterations = it + 1;
            if (!std::isfinite(step)) break;
            if (step <= opt.newton_tol) {
                converged = true;
                break;
            }
        }
        if (converged) Y = std::move(Z);
    }
    if (!converged) {
        // Fallback: refined backward integration from the tail data.
        diag.method = "shooting";
        const int sub = 16;
        Eigen::Vector2d y{wT, wpT};
        Y[n - 1] = y;
        for (int i = n - 1; i > 0; --i) {
            for (int s = 0; s < sub; ++s) y = detail::rk4_step(sys, y, -h / sub);
            Y[i - 1] = y;
        }
    }

    std::vector<double> w(n), wp(n);
    for (int i = 0; i < n; ++i) {
        w[i] = Y[i][0];
        wp[i] = Y[i][1];
        if (!(w[i] > 0.0) || !std::isfinite(w[i])) {
            throw NumericalError("radial_profile", "connection lost positivity at t=" + std::to_string(t[i]));
        }
    }
    diag.collocation_defect = detail::hs_defect(sys, Y, h);
    const auto fd = detail::fowler_fd_residual(c, w, h);
    for (double v : fd) diag.fowler_residual = std::max(diag.fowler_residual, std::abs(v));
    diag.core_gap = std::abs(w.front() - c.c_p);
    if (diag.core_gap > 1e-2) {
        throw NumericalError("radial_profile", "no approach to c_p at T-: gap " + std::to_string(diag.core_gap) +
                                                   " (method " + diag.method + ")");
    }

    // Least-squares fit of log y = log beta + s t over the last 4 units of t,
    // with y = w - C w^p removing the known second-order tail term.
    {
        auto y_of = [&](double wi) { return wi - C * std::pow(wi, p); };
        double St = 0, Sy = 0, Stt = 0, Sty = 0;
        int m = 0;
        for (int i = 0; i < n; ++i) {
            if (t[i] < opt.t_plus - 4.0) continue;
            const double ly = std::log(y_of(w[i]));
            St += t[i];
            Sy += ly;
            Stt += t[i] * t[i];
            Sty += t[i] * ly;
            ++m;
        }
        const double slope = (m * Sty - St * Sy) / (m * Stt - St * St);
        const double icpt = (Sy - slope * St) / m;
        diag.tail_exponent_fit = slope;
        diag.beta_fit = std::exp(icpt);
        for (int i = 0; i < n; ++i) {
            if (t[i] < opt.t_plus - 4.0) continue;
            const double y = diag.beta_fit * std::exp(c.s_decay * t[i]);
            const double model = y + C * std::pow(y, p);
            diag.tail_fit_error = std::max(diag.tail_fit_error, std::abs(model - w[i]) / w[i]);
        }
    }

    RadialProfile canonical(c, std::move(t), std::move(w), std::move(wp), 1.0);
    canonical.diagnostics() = diag;
    if (beta_target == 1.0) return canonical;
    return canonical.translated(std::log(beta_target) / (N - 2.0 - c.a));
}

inline ProfilePtr make_profile(double p, int N, double beta, const ConnectionOptions& opt = {}) {
    return std::make_shared<const RadialProfile>(solve_connection(p, N, beta, opt));
}

/// u_eps(x) = eps^{-a} u_1(x / eps).
struct ScaledFamily {
    ProfilePtr base;
    double epsilon = 1.0;

    double a() const { return base->coefficients().a; }
    double u(double r) const { return std::pow(epsilon, -a()) * base->u(r / epsilon); }
    double du(double r) const { return std::pow(epsilon, -a() - 1.0) * base->du(r / epsilon); }
    /// Tail coefficient of u_eps: eps^{N-2-a} beta.
    double beta() const { return std::pow(epsilon, base->N() - 2.0 - a()) * base->beta(); }
};

inline double scale_evaluate(const ScaledFamily& f, double r) { return f.u(r); }

struct Normalization {
    ScaledFamily family;
    double lambda = 1.0;
    double achieved_sup = 0.0;
};

/// sup_{t >= t0} w(t)^{p-1}, i.e. sup of s^2 u^{p-1}(s) over s >= e^{t0}.
inline double tail_sup(const RadialProfile& prof, double t0) {
    const double pm1 = prof.p() - 1.0;
    double m = std::pow(prof.fowler_w(t0), pm1);
    const auto& t = prof.t_grid();
    const auto& w = prof.w();
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] >= t0) m = std::max(m, std::pow(w[i], pm1));
    }
    return m;
}

/// Largest lambda <= 1 such that u_lambda = lambda^{-a} u(./lambda) obeys
/// sup_{s >= 1} s^2 u_lambda^{p-1}(s) <= alpha_bound.
inline Normalization select_normalization(const ProfilePtr& prof, double alpha_bound) {
    if (!(alpha_bound > 0.0)) throw ValidationError("alpha_bound > 0 violated");
    Normalization out;
    out.family = {prof, 1.0};
    const double g0 = tail_sup(*prof, 0.0);
    if (g0 <= alpha_bound) {
        out.achieved_sup = g0;
        return out;
    }
    double lo = 0.0, hi = 1.0;
    while (tail_sup(*prof, hi) > alpha_bound) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e4) throw NumericalError("radial_profile", "normalization search diverged");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        (tail_sup(*prof, mid) > alpha_bound ? lo : hi) = mid;
    }
    out.lambda = std::exp(-hi);
    out.family.epsilon = out.lambda;
    out.achieved_sup = tail_sup(*prof, hi);
    return out;
}

/// Samples u_eps on the mesh.
inline GridFunction sample(const ScaledFamily& f, const MeshPtr& mesh) {
    return GridFunction::sample(mesh, [&](double r) { return f.u(r); });
}

/// Pointwise -u'' - (N-1)/r u' - |u|^p with three-point nonuniform
/// differences; the two end nodes are set to 0.
inline GridFunction pde_residual(const GridFunction& u, int N, double p) {
    const auto& m = *u.mesh;
    const auto& v = u.radial();
    GridFunction res(u.mesh);
    for (std::size_t i = 1; i + 1 < m.size(); ++i) {
        const auto st = central_stencil(m.r[i - 1], m.r[i], m.r[i + 1]);
        const double d1 = st.d1[0] * v[i - 1] + st.d1[1] * v[i] + st.d1[2] * v[i + 1];
        const double d2 = st.d2[0] * v[i - 1] + st.d2[1] * v[i] + st.d2[2] * v[i + 1];
        res.radial()[i] = -d2 - (N - 1.0) / m.r[i] * d1 - std::pow(std::abs(v[i]), p);
    }
    return res;
}

/// Residual of the solved profile on its own grid, scaled by r^{a+2} so it
/// equals minus the Fowler residual (five-point stencil in t).
inline GridFunction pde_residual(const RadialProfile& prof) {
    const auto& t = prof.t_grid();
    std::vector<double> r(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) r[i] = std::exp(t[i]);
    auto mesh = mesh_from_nodes(std::move(r));
    const double h = (t.back() - t.front()) / double(t.size() - 1);
    auto fd = detail::fowler_fd_residual(prof.coefficients(), prof.w(), h);
    for (auto& x : fd) x = -x;
    return GridFunction(mesh, std::move(fd));
}

}  // namespace sylab
