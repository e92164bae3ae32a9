#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sylab/warped_lift.hpp"

using namespace sylab;

namespace {

WarpedSpec circle_over_ball(const WarpFunction& omega, int N = 5, int k = 1) { return {N, k, omega}; }

WarpFunction quarter_paraboloid() { return WarpFunction::radial(RadialFunction::polynomial_r2({1.0, 0.25})); }

// Delta of the fiber-invariant test function in flat R^N by 5-point differences.
double fd_laplacian(const std::vector<double>& x) {
    const PolyGaussian u;
    double s = 0.0;
    const double h = 1e-3;
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto at = [&](double d) {
            auto y = x;
            y[i] += d;
            return u(y);
        };
        s += (-at(2 * h) + 16 * at(h) - 30 * at(0) + 16 * at(-h) - at(-2 * h)) / (12 * h * h);
    }
    return s;
}

}  // namespace

TEST(HyperDual, ExactSecondDerivatives) {
    // f(x, y) = exp(x y) sin(x) at (0.3, -0.7)
    const double x = 0.3, y = -0.7;
    const HyperDual X{x, 1.0, 0.0, 0.0}, Y{y, 0.0, 1.0, 0.0};
    const auto f = exp(X * Y) * sin(X);
    const double e = std::exp(x * y);
    EXPECT_NEAR(f.a, e * std::sin(x), 1e-15);
    EXPECT_NEAR(f.b, e * (y * std::sin(x) + std::cos(x)), 1e-15);
    EXPECT_NEAR(f.c, e * x * std::sin(x), 1e-15);
    EXPECT_NEAR(f.d, e * (std::sin(x) + x * y * std::sin(x) + x * std::cos(x)), 1e-15);
    const auto q = sqrt(X) / (X + HyperDual(1.0));
    EXPECT_NEAR(q.b, (0.5 / std::sqrt(x) * (x + 1) - std::sqrt(x)) / ((x + 1) * (x + 1)), 1e-14);
}

TEST(WarpedLaplacian, UnwarpedProductIsTheBaseLaplacian) {
    const auto s = circle_over_ball(WarpFunction::radial(RadialFunction::constant(1.0)));
    const auto rep = product_laplacian_check(s, PolyGaussian{}, 20, 1);
    EXPECT_LE(rep.max_discrepancy, 1e-12);
    const std::vector<double> x{0.2, -0.1, 0.4, 0.0, 0.3};
    EXPECT_NEAR(reduced_laplacian(s, PolyGaussian{}, x), fd_laplacian(x), 1e-7);
}

TEST(WarpedLaplacian, ParaboloidWarpOverTheFiveBall) {
    const auto rep = product_laplacian_check(circle_over_ball(quarter_paraboloid()), PolyGaussian{}, 20, 42);
    EXPECT_EQ(rep.samples, 20);
    EXPECT_LE(rep.max_discrepancy, 1e-10);
    EXPECT_GT(rep.max_magnitude, 0.1);
}

TEST(WarpedLaplacianProperty, OtherWarpsAndFiberDimensions) {
    for (const auto& w : {WarpFunction::radial(RadialFunction::gaussian(1.5, 0.5, 0.7)),
                          WarpFunction::radial(RadialFunction::cosine_r2(2.0, 1.0, 1.0)),
                          WarpFunction::affine(2.0, {0.3, -0.2, 0.1})}) {
        for (int k : {1, 2, 3}) {
            const auto rep = product_laplacian_check(circle_over_ball(w, 5, k), PolyGaussian{}, 10, 7);
            EXPECT_LE(rep.max_discrepancy, 1e-10) << w.describe() << " k=" << k;
        }
    }
}

TEST(WarpedLaplacian, WrongFirstOrderCoefficientIsDetected) {
    // the reduction with m = N in place of the fiber dimension disagrees with the metric
    const auto s = circle_over_ball(quarter_paraboloid(), 5, 1);
    const auto wrong = circle_over_ball(quarter_paraboloid(), 5, 5);
    const std::vector<double> z{0.3, 0.1, -0.2, 0.25, 0.05, 0.5};
    const double lb = laplace_beltrami(s, PolyGaussian{}, z);
    EXPECT_GT(std::abs(lb - reduced_laplacian(wrong, PolyGaussian{}, {0.3, 0.1, -0.2, 0.25, 0.05})), 1e-3);
}

TEST(WarpedLaplacian, ConstantFunction) {
    const auto rep = product_laplacian_check(circle_over_ball(quarter_paraboloid()), UnitFunction{}, 10, 3);
    EXPECT_EQ(rep.max_magnitude, 0.0);
    EXPECT_EQ(rep.max_discrepancy, 0.0);
}

TEST(Minimality, CriticalPointsGiveMinimalFibers) {
    const std::vector<double> o(5, 0.0), x{0.1, 0.2, 0.0, 0.0, 0.0};
    EXPECT_TRUE(fiber_minimality_check(circle_over_ball(WarpFunction::radial(RadialFunction::polynomial_r2({1.0, 1.0}))), o).minimal);
    EXPECT_TRUE(fiber_minimality_check(circle_over_ball(WarpFunction::radial(RadialFunction::cosine_r2(2.0, 1.0, 1.0))), o).minimal);
    const auto tilt = circle_over_ball(WarpFunction::affine(1.0, {1.0}));
    EXPECT_FALSE(fiber_minimality_check(tilt, o).minimal);
    EXPECT_NEAR(fiber_minimality_check(tilt, x).gradient_norm, 1.0, 1e-15);
    // grad(2 + cos|x|^2) = -2 sin(|x|^2) x
    const auto cosw = circle_over_ball(WarpFunction::radial(RadialFunction::cosine_r2(2.0, 1.0, 1.0)));
    EXPECT_NEAR(fiber_minimality_check(cosw, x).gradient_norm, 2.0 * std::sin(0.05) * std::sqrt(0.05), 1e-14);
    EXPECT_THROW(fiber_minimality_check(cosw, {0.0}), ValidationError);
}

TEST(WarpedSpec, ValidationAndCoefficientPower) {
    EXPECT_NO_THROW(circle_over_ball(quarter_paraboloid()).validate(1.0));
    EXPECT_THROW(circle_over_ball(WarpFunction::affine(0.5, {1.0})).validate(1.0), ValidationError);
    const auto a = omega_power_coefficient(circle_over_ball(quarter_paraboloid(), 5, 2));
    for (double r : {0.0, 0.3, 1.0}) EXPECT_NEAR(a.value(r), std::pow(1.0 + r * r / 4.0, 2), 1e-15);
    EXPECT_THROW(omega_power_coefficient(circle_over_ball(WarpFunction::radial(RadialFunction::gaussian(1, 1, 1)))),
                 ValidationError);
}

TEST(ReducedResidual, UnwarpedMatchesThePlainEquation) {
    const auto mesh = graded_mesh(1e-3, 0.5, 1.0, 32);
    const auto v = GridFunction::sample(mesh, [](double r) { return 2.0 / (r * r) + std::sin(r); });
    const auto h = RadialFunction::constant(1.0);
    const auto s = circle_over_ball(WarpFunction::radial(RadialFunction::constant(1.0)));
    const auto r1 = reduced_operator_residual(v, s, h, 2.0);
    const std::vector<double> one(mesh->size(), 1.0), zero(mesh->size(), 0.0);
    const auto r2 = anisotropic_residual(v, one, zero, one, 5, 2.0);
    for (std::size_t i = 1; i + 1 < mesh->size(); ++i) EXPECT_NEAR(r1[i], r2[i], 1e-13 * (1.0 + std::abs(r2[i])));
}

TEST(ReducedResidual, ConstantFunctionClosedForm) {
    const auto mesh = graded_mesh(1e-3, 0.5, 1.0, 16);
    const double c = 0.7;
    const auto v = GridFunction::sample(mesh, [&](double) { return c; });
    const auto s = circle_over_ball(quarter_paraboloid(), 5, 2);
    const auto h = RadialFunction::gaussian(1.0, 0.5, 0.4);
    const auto res = reduced_operator_residual(v, s, h, 1.8);
    for (std::size_t i = 1; i + 1 < mesh->size(); ++i) {
        const double r = mesh->r[i];
        const double want = std::pow(1.0 + r * r / 4.0, 2) * (h.value(r) * c - std::pow(c, 1.8));
        // stencil rounding on a constant grows like eps_mach / h^2
        EXPECT_NEAR(res[i], want, 1e-12 / (r * r));
    }
}

TEST(ReducedResidualProperty, IdentityWithTheAnisotropicForm) {
    const auto mesh = graded_mesh(1e-4, 0.5, 1.0, 32);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.5, 2.0);
    for (int t = 0; t < 10; ++t) {
        const double A = U(rng), B = U(rng);
        const auto v = GridFunction::sample(mesh, [&](double r) { return A * std::pow(r, -2.5) + B * std::cos(r); });
        const auto rep = residual_identity(v, circle_over_ball(quarter_paraboloid(), 5, 2), RadialFunction::constant(1.0), 1.8);
        EXPECT_LE(rep.max_rel, 1e-10);
    }
}

TEST(Lift, ConstantAlongFibersAndCoreRate) {
    const auto mesh = graded_mesh(1e-4, 0.5, 1.0, 32);
    const auto v = GridFunction::sample(mesh, [](double r) { return 2.0 * std::pow(r, -2.0) * (1.0 + r); });
    const std::vector<double> x{0.1, 0.2, 0.0, -0.1, 0.05};
    EXPECT_EQ(lift_evaluate(v, 2.0, x, {0.1}), lift_evaluate(v, 2.0, x, {0.9}));
    // equal to the base solution at a node
    const double r = mesh->r[200];
    EXPECT_DOUBLE_EQ(lift_evaluate(v, 2.0, {r, 0, 0, 0, 0}, {0.0}), v[200]);
    // blow-up rate rho^{-2} toward the base point
    const double r1 = 1e-6, r2 = 1e-7;
    const double u1 = lift_evaluate(v, 2.0, {r1, 0, 0, 0, 0}, {0.0}), u2 = lift_evaluate(v, 2.0, {r2, 0, 0, 0, 0}, {0.0});
    EXPECT_NEAR(std::log(u2 / u1) / std::log(r1 / r2), 2.0, 1e-12);
    EXPECT_TRUE(std::isinf(lift_evaluate(v, 2.0, std::vector<double>(5, 0.0), {0.0})));
    EXPECT_THROW(lift_evaluate(v, 2.0, {2.0, 0, 0, 0, 0}, {0.0}), ValidationError);
}

TEST(EquivariantGate, AdmissibleConfigurations) {
    const auto ok = equivariant_params(7, 2);
    EXPECT_TRUE(ok.admissible);
    EXPECT_EQ(ok.N, 5);
    EXPECT_NEAR(ok.p, 1.8, 1e-15);
    EXPECT_NEAR(ok.critical_exponent, 10.0 / 3.0, 1e-12);
    EXPECT_FALSE(equivariant_params(6, 2).admissible);
}
