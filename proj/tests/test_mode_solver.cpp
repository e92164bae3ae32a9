#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "sylab/linear_checks.hpp"
#include "sylab/mode_solver.hpp"

using namespace sylab;

namespace {

ProfilePtr model_profile() {
    static ProfilePtr prof = make_profile(2.0, 5, 1.0);
    return prof;
}

ProblemParams params_for(double eps) {
    ProblemParams P;
    P.epsilon = eps;
    return P;
}

CoefficientField smooth_coeffs() {
    CoefficientField c;
    c.a = RadialFunction::polynomial_r2({1.0, 0.1});
    c.h = RadialFunction::constant(1.0);
    return c;
}

double normalized_lambda() {
    static const double lam = [] {
        const auto c = smooth_coeffs();
        const double c0 = coercivity_constant(c, 1.0, 5);
        return select_normalization(model_profile(), normalization_bound(c0, 5, 2.0, c.max_a(1.0))).lambda;
    }();
    return lam;
}

ScaledFamily family_for(double eps) { return ScaledFamily{model_profile(), eps * normalized_lambda()}; }

// v* = r^nu (1 - r^2), which vanishes at R = 1 and behaves like r^nu at the core.
struct Manufactured {
    double nu;
    double v(double r) const { return std::pow(r, nu) * (1.0 - r * r); }
    double d1(double r) const { return nu * std::pow(r, nu - 1.0) - (nu + 2.0) * std::pow(r, nu + 1.0); }
    double d2(double r) const {
        return nu * (nu - 1.0) * std::pow(r, nu - 2.0) - (nu + 2.0) * (nu + 1.0) * std::pow(r, nu);
    }
};

// L v for the radial mode with the analytic u_bar = chi u_eps.
GridFunction apply_exact(const Manufactured& m, const ProblemParams& P, const CoefficientField& c,
                         const ScaledFamily& fam, const MeshPtr& mesh, bool with_profile) {
    const Cutoff chi(P.sigma);
    return GridFunction::sample(mesh, [&](double r) {
        const double a = c.a.value(r);
        const double ub = with_profile ? chi.value(r) * fam.u(r) : 0.0;
        const double V = P.p * std::pow(ub, P.p - 1.0) - c.h.value(r);
        return a * (m.d2(r) + (P.N - 1.0) / r * m.d1(r) + V * m.v(r)) + c.a.d1(r) * m.d1(r);
    });
}

double weighted_error(const GridFunction& v, const Manufactured& m, double nu) {
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double r = v.mesh->r[i], w = std::pow(r, -nu);
        err = std::max(err, w * std::abs(v[i] - m.v(r)));
        ref = std::max(ref, w * std::abs(m.v(r)));
    }
    return err / ref;
}

}  // namespace

TEST(ModeOperator, HarmonicFunctionsAreAnnihilated) {
    ProblemParams P = params_for(0.005);
    CoefficientField flat;
    const auto mesh = graded_mesh_for(P.epsilon, P.sigma, P.R, 64);
    const auto L = linearize_unperturbed(P, flat, mesh);
    // r^{2-N} in mode 0 and r^{gamma~_1^+} = r in mode 1
    for (auto [j, e] : {std::pair{0, 2.0 - P.N}, std::pair{1, 1.0}}) {
        const auto op = assemble_mode(j, L, e);
        std::vector<double> w(mesh->size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::pow(mesh->r[i], e);
        const auto y = op.apply(w);
        double worst = 0.0;
        for (std::size_t i = 1; i + 1 < w.size(); ++i) {
            const double r = mesh->r[i];
            worst = std::max(worst, std::abs(y[i]) * r * r / w[i]);
        }
        EXPECT_LT(worst, j == 0 ? 5e-3 : 1e-10) << "mode " << j;
    }
}

TEST(ModeOperator, FrobeniusClosureIsExactForTheTargetPower) {
    ProblemParams P = params_for(0.005);
    const auto mesh = graded_mesh_for(P.epsilon, P.sigma, P.R);
    const auto L = linearize_unperturbed(P, smooth_coeffs(), mesh);
    const auto op = assemble_mode(0, L, P.nu);
    const double w0 = std::pow(mesh->r[0], P.nu), w1 = std::pow(mesh->r[1], P.nu);
    EXPECT_NEAR(op.matrix.diag[0] * w0 + op.matrix.upper[0] * w1, 0.0, 1e-12 * w0);
}

TEST(ModeOperator, PotentialRatioTendsToOneAtTheCore) {
    const double eps = 0.005;
    ProblemParams P = params_for(eps);
    const auto mesh = graded_mesh_for(eps, P.sigma, P.R);
    const auto L = linearize(P, smooth_coeffs(), family_for(eps), mesh);
    EXPECT_NEAR(potential_ratio(L, 0), 1.0, 0.02);
    EXPECT_DOUBLE_EQ(L.core_potential, potential_constant(2.0, 5));
}

TEST(Green, ManufacturedSolutionUnperturbed) {
    ProblemParams P = params_for(0.005);
    const auto c = smooth_coeffs();
    const Manufactured m{P.nu};
    double prev = 0.0;
    for (int nps : {16, 32, 64}) {
        const auto mesh = graded_mesh_for(P.epsilon, P.sigma, P.R, nps);
        const auto L = linearize_unperturbed(P, c, mesh);
        const auto f = apply_exact(m, P, c, family_for(P.epsilon), mesh, false);
        const double err = weighted_error(apply_green(f, L, P.nu).v, m, P.nu);
        EXPECT_LT(err, 0.02) << nps;
        if (prev > 0.0) {
            EXPECT_NEAR(std::log2(prev / err), 2.0, 0.3) << nps;
        }
        prev = err;
    }
}

TEST(Green, ManufacturedSolutionWithProfile) {
    for (double eps : {0.01, 0.005, 0.0025}) {
        ProblemParams P = params_for(eps);
        const auto c = smooth_coeffs();
        const auto fam = family_for(eps);
        const Manufactured m{P.nu};
        const auto mesh = graded_mesh_for(eps, P.sigma, P.R, 32);
        const auto L = linearize(P, c, fam, mesh);
        const auto f = apply_exact(m, P, c, fam, mesh, true);
        EXPECT_LT(weighted_error(apply_green(f, L, P.nu).v, m, P.nu), 0.02) << eps;
    }
}

TEST(Green, ZeroRightHandSide) {
    ProblemParams P = params_for(0.005);
    const auto mesh = graded_mesh_for(P.epsilon, P.sigma, P.R);
    const auto L = linearize(P, smooth_coeffs(), family_for(P.epsilon), mesh);
    const auto sol = apply_green(GridFunction(mesh), L, P.nu);
    for (double v : sol.v.radial()) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(sol.norm.total, 0.0);
}

TEST(GreenProperty, LinearityAndSelfConsistency) {
    ProblemParams P = params_for(0.005);
    const auto mesh = graded_mesh_for(P.epsilon, P.sigma, P.R);
    const auto L = linearize(P, smooth_coeffs(), family_for(P.epsilon), mesh);
    std::mt19937_64 rng(7);
    const auto op = assemble_mode(0, L, P.nu);
    for (int t = 0; t < 5; ++t) {
        const auto f1 = random_weighted_function(mesh, P.nu - 2.0, P.sigma, rng);
        const auto f2 = random_weighted_function(mesh, P.nu - 2.0, P.sigma, rng);
        const double a = 1.7, b = -0.3;
        const auto lhs = apply_green(a * f1 + b * f2, L, P.nu).v;
        const auto rhs = a * apply_green(f1, L, P.nu).v + b * apply_green(f2, L, P.nu).v;
        const auto diff = lhs - rhs;
        EXPECT_LT(weighted_holder_norm(diff, 0, 0.0, P.nu, P.sigma).total,
                  1e-12 * weighted_holder_norm(lhs, 0, 0.0, P.nu, P.sigma).total);

        // L (G f) = f at interior nodes
        const auto back = op.apply(apply_green(f1, L, P.nu).v.radial());
        GridFunction res(mesh);
        for (std::size_t i = 1; i + 1 < mesh->size(); ++i) res.radial()[i] = back[i] - f1[i];
        EXPECT_LT(weighted_holder_norm(res, 0, 0.0, P.nu - 2.0, P.sigma).total, 1e-10);
    }
}

TEST(Green, ModesDecouple) {
    ProblemParams P = params_for(0.005);
    const auto mesh = graded_mesh_for(P.epsilon, P.sigma, P.R);
    const auto L = linearize(P, smooth_coeffs(), family_for(P.epsilon), mesh);
    std::mt19937_64 rng(3);
    GridFunction f(mesh, 3);
    f.channels[2] = random_weighted_function(mesh, P.nu - 2.0, P.sigma, rng).radial();
    const auto sol = apply_green(f, L, P.nu);
    for (int j : {0, 1})
        for (double v : sol.v.channels[j]) EXPECT_EQ(v, 0.0);
    double m = 0.0;
    for (double v : sol.v.channels[2]) m = std::max(m, std::abs(v));
    EXPECT_GT(m, 0.0);
    ASSERT_EQ(sol.condition.size(), 3u);
}

TEST(Green, ProbeIsDeterministicAndUniformInEpsilon) {
    double lo = 1e300, hi = 0.0;
    for (double eps : {0.01, 0.005, 0.0025, 0.00125}) {
        ProblemParams P = params_for(eps);
        const auto mesh = graded_mesh_for(eps, P.sigma, P.R);
        const auto L = linearize(P, smooth_coeffs(), family_for(eps), mesh);
        const double g = green_norm_probe(L, P.nu, 8, 11);
        EXPECT_EQ(g, green_norm_probe(L, P.nu, 8, 11));
        lo = std::min(lo, g);
        hi = std::max(hi, g);
    }
    EXPECT_LT(hi / lo, 3.0);
}

TEST(Green, IndicialWeightIsRejected) {
    ProblemParams P = params_for(0.005);
    const auto mesh = graded_mesh_for(P.epsilon, P.sigma, P.R);
    const auto L = linearize(P, smooth_coeffs(), family_for(P.epsilon), mesh);
    const double re = indicial_roots_origin(2.0, 5, 0).plus.real();
    EXPECT_THROW(apply_green(GridFunction(mesh), L, re), SingularSystemError);
    EXPECT_THROW(apply_green(GridFunction(mesh), L, re + 5e-10), SingularSystemError);
    EXPECT_NO_THROW(apply_green(GridFunction(mesh), L, re + 1e-3));
}

// ------------------------------------------------------------ coercivity

TEST(Coercivity, FlatCoefficientsGiveOne) {
    EXPECT_NEAR(coercivity_constant(CoefficientField{}, 1.0, 5), 1.0, 1e-10);
}

TEST(Coercivity, PositivePotentialOnlyHelps) {
    for (double h : {0.5, 1.0, 10.0}) {
        CoefficientField c;
        c.h = RadialFunction::constant(h);
        EXPECT_GE(coercivity_constant(c, 1.0, 5), 1.0 - 1e-12) << h;
    }
}

TEST(Coercivity, NegativePotentialMatchesDirichletEigenvalue) {
    // first radial Dirichlet eigenvalue of the unit 5-ball is x1^2, tan x1 = x1
    double x = 4.49;
    for (int i = 0; i < 50; ++i) x -= (std::tan(x) - x) / (1.0 / (std::cos(x) * std::cos(x)) - 1.0);
    for (double lam : {2.0, 10.0}) {
        CoefficientField c;
        c.h = RadialFunction::constant(-lam);
        EXPECT_NEAR(coercivity_constant(c, 1.0, 5), 1.0 - lam / (x * x), 2e-5) << lam;
    }
    CoefficientField c;
    c.h = RadialFunction::constant(-30.0);
    EXPECT_THROW(coercivity_constant(c, 1.0, 5), ValidationError);
}

TEST(Coercivity, InertiaBisectionMatchesDenseEigensolver) {
    CoefficientField c = smooth_coeffs();
    c.h = RadialFunction::gaussian(-2.0, 1.0, 0.3);
    const int n = 200;
    const auto F = radial_forms(c, 1.0, 5, n);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n), B = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        A(i, i) = F.form.diag[i];
        B(i, i) = F.dirichlet.diag[i];
        if (i + 1 < n) {
            A(i, i + 1) = A(i + 1, i) = F.form.upper[i];
            B(i, i + 1) = B(i + 1, i) = F.dirichlet.upper[i];
        }
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B);
    EXPECT_NEAR(coercivity_constant(c, 1.0, 5, n), es.eigenvalues().minCoeff(), 1e-8);
}

TEST(Coercivity, NormalizationBound) {
    EXPECT_NEAR(normalization_bound(1.0, 5, 2.0, 1.0), 9.0 / 16.0, 1e-15);
    EXPECT_NEAR(normalization_bound(0.5, 5, 2.0, 2.0), 9.0 / 64.0, 1e-15);
}

// ------------------------------------------------------ maximum principle

TEST(MaxPrinciple, ConstantAndZeroData) {
    const double eps = 0.005;
    ProblemParams P = params_for(eps);
    const auto c = smooth_coeffs();
    const double c0 = coercivity_constant(c, P.R, P.N);
    const auto rep = max_principle_check(P, c, family_for(eps), c0, 1, 1);
    EXPECT_TRUE(rep.normalization_ok);
    EXPECT_EQ(rep.violations, 0);
    EXPECT_LE(rep.worst_positive, kSignTolerance);
    // g = 0 gives w = 0
    const auto mesh = graded_mesh(eps, P.sigma, P.R, 32);
    const auto L = linearize(P, c, family_for(eps), mesh);
    const auto op = assemble_mode(0, L, 0.0, InnerClosure::Dirichlet);
    for (double v : TridiagonalLU(op.matrix, 0).solve(op.rhs(std::vector<double>(mesh->size(), 0.0))))
        EXPECT_EQ(v, 0.0);
}

TEST(MaxPrincipleProperty, RandomNonnegativeData) {
    ProblemParams P = params_for(0.005);
    const auto c = smooth_coeffs();
    const double c0 = coercivity_constant(c, P.R, P.N);
    const auto rep = max_principle_check(P, c, family_for(P.epsilon), c0, 100, 2024);
    EXPECT_EQ(rep.trials, 100);
    EXPECT_EQ(rep.violations, 0);
    EXPECT_TRUE(rep.passed());
}

TEST(MaxPrinciple, ViolatedNormalizationIsReported) {
    ProblemParams P = params_for(0.005);
    const auto c = smooth_coeffs();
    const double c0 = coercivity_constant(c, P.R, P.N);
    EXPECT_THROW(max_principle_check(P, c, family_for(P.epsilon), c0, 5, 1, true, 100.0), ValidationError);
    const auto rep = max_principle_check(P, c, family_for(P.epsilon), c0, 20, 1, false, 100.0);
    EXPECT_FALSE(rep.normalization_ok);
    EXPECT_FALSE(rep.passed());
    EXPECT_LT(rep.required_lambda, normalized_lambda());
    EXPECT_EQ(rep.trials, 20);
}

// ------------------------------------------------------------------ Hardy

TEST(Hardy, ClosedFormTrialFunction) {
    // w = 1 - r in N = 5: int w^2 r^2 dr = 1/30, int r^4 dr = 1/5
    const auto mesh = graded_mesh(1e-4, 0.5, 1.0, 32);
    const auto [lhs, rhs] = hardy_sides(*mesh, 5, [](double r) { return 1.0 - r; }, [](double) { return -1.0; });
    EXPECT_NEAR(lhs / rhs, 1.0 / 6.0, 1e-10);
}

TEST(Hardy, ZeroFunction) {
    const auto mesh = graded_mesh(1e-4, 0.5, 1.0, 32);
    const auto [lhs, rhs] = hardy_sides(*mesh, 5, [](double) { return 0.0; }, [](double) { return 0.0; });
    EXPECT_EQ(lhs, 0.0);
    EXPECT_EQ(rhs, 0.0);
}

TEST(HardyProperty, RandomTrialsRespectTheConstant) {
    const auto mesh = graded_mesh(1e-4, 0.5, 1.0, 32);
    for (int N : {3, 5, 7}) {
        const auto rep = hardy_check(*mesh, N, 100, 99);
        EXPECT_EQ(rep.trials, 100);
        EXPECT_NEAR(rep.constant, 4.0 / ((N - 2.0) * (N - 2.0)), 1e-15);
        EXPECT_TRUE(rep.passed()) << N << " " << rep.max_ratio;
        EXPECT_GT(rep.max_ratio, 0.0);
    }
}
