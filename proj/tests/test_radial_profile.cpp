#include <gtest/gtest.h>

#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <random>

#include "sylab/radial_profile.hpp"

using namespace sylab;

namespace {

ProfilePtr model_profile() {
    static ProfilePtr prof = make_profile(2.0, 5, 1.0);
    return prof;
}

// Adaptive Dormand-Prince integration of the Fowler system backward from
// the two-term tail data at t_start down to t_end.
double odeint_w(double p, int N, double t_start, double t_end) {
    using State = std::array<double, 2>;
    const double a = 2.0 / (p - 1.0), b = N - 2.0 - 2.0 * a, k = a * (N - 2.0 - a), s = a + 2.0 - N;
    const double C = -1.0 / (p * p * s * s + b * p * s - k);
    const double y = std::exp(s * t_start);
    State x{y + C * std::pow(y, p), s * y + C * p * s * std::pow(y, p)};
    auto rhs = [&](const State& z, State& dz, double) {
        dz[0] = z[1];
        dz[1] = -b * z[1] + k * z[0] - std::pow(std::abs(z[0]), p);
    };
    namespace oi = boost::numeric::odeint;
    oi::integrate_adaptive(oi::make_controlled<oi::runge_kutta_dopri5<State>>(1e-13, 1e-13), rhs, x, t_start,
                           t_end, -1e-3);
    return x[0];
}

}  // namespace

TEST(FowlerRhs, HandValues) {
    EXPECT_NEAR(fowler_rhs(2.0, 0.0, 2.0, 5), 0.0, 1e-15);
    EXPECT_EQ(fowler_rhs(0.0, 0.0, 2.0, 5), 0.0);
    EXPECT_NEAR(fowler_rhs(1.0, 0.0, 2.0, 5), 1.0, 1e-15);
    // damping b = N - 2 - 4/(p-1) = -1 for (2,5)
    EXPECT_NEAR(fowler_rhs(1.0, 1.0, 2.0, 5), 2.0, 1e-15);
}

TEST(Connection, ModelCaseDiagnostics) {
    const auto& prof = *model_profile();
    const auto& d = prof.diagnostics();
    EXPECT_EQ(d.method, "collocation");
    EXPECT_LE(d.fowler_residual, 1e-8);
    EXPECT_LE(d.collocation_defect, 1e-12);
    EXPECT_LE(std::abs(prof.w().front() - 2.0), 0.02);
    EXPECT_NEAR(d.tail_exponent_fit, -1.0, 0.01);
    EXPECT_LE(d.tail_fit_error, 1e-2);
    EXPECT_NEAR(d.beta_fit, 1.0, 1e-6);
    for (double w : prof.w()) ASSERT_GT(w, 0.0);
}

TEST(Connection, AgreesWithAdaptiveIntegrator) {
    const auto& prof = *model_profile();
    for (double t : {-20.0, -10.0, -4.0, 0.0, 3.0, 10.0}) {
        const double ref = odeint_w(2.0, 5, 15.0, t);
        EXPECT_NEAR(prof.fowler_w(t), ref, 1e-7 * std::max(1.0, std::abs(ref))) << "t=" << t;
    }
}

TEST(Connection, OtherExponentsAgreeWithIntegrator) {
    for (auto [p, N] : {std::pair{1.8, 5}, std::pair{1.5, 7}, std::pair{4.0, 3}}) {
        const auto prof = solve_connection(p, N, 1.0);
        for (double t : {-8.0, 0.0, 6.0}) {
            const double ref = odeint_w(p, N, 15.0, t);
            EXPECT_NEAR(prof.fowler_w(t), ref, 1e-7 * std::max(1.0, std::abs(ref))) << p << " " << N << " " << t;
        }
    }
}

TEST(Connection, ConstantProfileHasZeroResidual) {
    const FowlerCoefficients c(2.0, 5);
    std::vector<double> t(200), w(200, c.c_p), wp(200, 0.0);
    for (int i = 0; i < 200; ++i) t[i] = -5.0 + 0.05 * i;
    const RadialProfile flat(c, t, w, wp, 1.0);
    const auto res = pde_residual(flat);
    for (double v : res.radial()) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Connection, BetaIsATranslation) {
    const auto& p1 = *model_profile();
    const auto p10 = solve_connection(2.0, 5, 10.0);
    const double dt = std::log(10.0) / (5 - 2.0 - 2.0);
    ASSERT_EQ(p10.w().size(), p1.w().size());
    for (std::size_t i = 0; i < p1.w().size(); ++i) {
        ASSERT_NEAR(p10.t_grid()[i] - p1.t_grid()[i], dt, 1e-12);
        ASSERT_NEAR(p10.w()[i], p1.w()[i], 1e-8);
    }
    for (double t : {-3.0, 0.5, 7.0, 30.0}) EXPECT_NEAR(p10.fowler_w(t), p1.fowler_w(t - dt), 1e-8);
    EXPECT_NEAR(p10.beta(), 10.0, 1e-12);
    EXPECT_NEAR(p10.diagnostics().beta_fit, 10.0, 1e-5);
}

TEST(Connection, RejectsBadInput) {
    EXPECT_THROW(solve_connection(3.0, 5, 1.0), ValidationError);
    EXPECT_THROW(solve_connection(2.0, 5, 0.0), ValidationError);
}

TEST(ScaledFamily, TailCoefficientScales) {
    const ScaledFamily fam{model_profile(), 0.1};
    EXPECT_NEAR(fam.beta(), 0.1, 1e-15);
    // far field: r^{N-2} u_eps(r) -> eps beta
    const double r = 0.1 * std::exp(25.0);
    EXPECT_NEAR(std::pow(r, 3.0) * fam.u(r), 0.1, 1e-8);
}

TEST(ScaledFamily, BlowUpConstantIndependentOfEpsilon) {
    for (double eps : {1.0, 0.1, 0.005}) {
        const ScaledFamily fam{model_profile(), eps};
        const double r = 1e-6 * eps;
        EXPECT_NEAR(r * r * fam.u(r) / 2.0, 1.0, 0.01) << "eps=" << eps;
    }
}

TEST(ScaledFamilyProperty, ScalingIdentity) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> le(-4.0, 0.0), lr(-14.0, 14.0);
    for (int s = 0; s < 500; ++s) {
        const double eps = std::pow(10.0, le(rng));
        const double r = std::exp(lr(rng));
        const ScaledFamily fe{model_profile(), eps}, f1{model_profile(), 1.0};
        const double lhs = scale_evaluate(fe, r);
        const double rhs = std::pow(eps, -2.0) * scale_evaluate(f1, r / eps);
        ASSERT_NEAR(lhs / rhs, 1.0, 1e-13);
    }
}

TEST(ScaledFamilyProperty, FittedBetaScales) {
    // fit-to-fit: r^{N-2} u at matching far-field points
    for (double eps : {0.5, 0.05, 0.002}) {
        const ScaledFamily fe{model_profile(), eps}, f1{model_profile(), 1.0};
        const double r1 = std::exp(14.0);
        const double b1 = std::pow(r1, 3.0) * f1.u(r1);
        const double be = std::pow(eps * r1, 3.0) * fe.u(eps * r1);
        EXPECT_NEAR(be / b1, eps, 1e-6 * eps);
    }
}

TEST(Normalization, LargeBoundKeepsProfile) {
    const auto n = select_normalization(model_profile(), k_constant(2.0, 5));
    EXPECT_EQ(n.lambda, 1.0);
    EXPECT_LE(n.achieved_sup, 2.0);
}

TEST(Normalization, SmallBoundIsMet) {
    for (double alpha : {0.5, 0.25, 0.01}) {
        const auto n = select_normalization(model_profile(), alpha);
        EXPECT_LT(n.lambda, 1.0);
        EXPECT_LE(n.achieved_sup, alpha);
        EXPECT_GT(n.achieved_sup, alpha * (1 - 1e-6));
        // direct check over s >= 1
        for (double s = 1.0; s < 1e4; s *= 1.1) {
            ASSERT_LE(s * s * n.family.u(s), alpha * (1 + 1e-9));
        }
    }
}

TEST(Normalization, TailIsMonotone) {
    const auto& prof = *model_profile();
    for (std::size_t i = 1; i < prof.w().size(); ++i) {
        if (prof.t_grid()[i - 1] >= 0.0) {
            ASSERT_LT(prof.w()[i], prof.w()[i - 1]);
        }
    }
}

TEST(PdeResidual, ConstantFunction) {
    const auto m = uniform_mesh(1.0, 2.0, 11);
    const auto res = pde_residual(GridFunction::sample(m, [](double) { return 1.0; }), 5, 2.0);
    for (std::size_t i = 1; i + 1 < m->size(); ++i) EXPECT_NEAR(res[i], -1.0, 1e-10);
}

TEST(PdeResidual, ExactSingularSolutionConvergesSecondOrder) {
    double prev = 0.0;
    for (int n : {21, 41, 81, 161}) {
        const auto m = uniform_mesh(1.0, 2.0, n);
        const auto res = pde_residual(GridFunction::sample(m, [](double r) { return 2.0 / (r * r); }), 5, 2.0);
        double mx = 0.0;
        for (double v : res.radial()) mx = std::max(mx, std::abs(v));
        if (prev > 0.0) {
            EXPECT_NEAR(prev / mx, 4.0, 1.2);
        }
        prev = mx;
    }
}

TEST(PdeResidual, SolvedConnectionOnItsMesh) {
    const auto res = pde_residual(*model_profile());
    for (double v : res.radial()) ASSERT_LE(std::abs(v), 1e-6);
}

TEST(ConnectionProperty, PositiveWithCoreApproachAcrossWindow) {
    for (int N = 3; N <= 8; ++N) {
        for (int i = 1; i <= 4; ++i) {
            const double p = subcritical_lower(N) + (subcritical_upper(N) - subcritical_lower(N)) * i / 5.0;
            const auto prof = solve_connection(p, N, 1.0);
            for (double w : prof.w()) ASSERT_GT(w, 0.0);
            ASSERT_LE(prof.diagnostics().core_gap, 1e-2) << "p=" << p << " N=" << N;
        }
    }
}
