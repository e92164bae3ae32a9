#include <gtest/gtest.h>

#include <cmath>

#include "sylab/exponents.hpp"

using namespace sylab;

namespace {

// 50 interior points of the open exponent window for dimension N.
double grid_p(int N, int i) {
    const double lo = subcritical_lower(N), hi = subcritical_upper(N);
    return lo + (hi - lo) * (i + 1) / 51.0;
}

}  // namespace

TEST(Exponents, KConstantHandValues) {
    EXPECT_NEAR(k_constant(2.0, 5), 2.0, 1e-15);
    EXPECT_NEAR(k_constant(1.8, 5), 1.25, 1e-14);
    // approaching p = N/(N-2) drives k to zero
    EXPECT_NEAR(k_constant(5.0 / 3.0 + 1e-12, 5), 0.0, 1e-10);
}

TEST(Exponents, KConstantRejectsWindow) {
    EXPECT_THROW(k_constant(3.0, 5), ValidationError);
    EXPECT_THROW(k_constant(5.0 / 3.0, 5), ValidationError);
    EXPECT_THROW(k_constant(1.5, 2), ValidationError);
    try {
        k_constant(3.0, 5);
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("N/(N-2) < p < (N+2)/(N-2)"), std::string::npos);
    }
}

TEST(Exponents, FowlerConstant) {
    EXPECT_NEAR(fowler_constant(2.0, 5), 2.0, 1e-15);
    EXPECT_NEAR(fowler_constant(1.8, 5), std::pow(1.25, 1.25), 1e-14);
    // exp(1.25 ln 1.25) evaluated independently
    EXPECT_NEAR(fowler_constant(1.8, 5), 1.3217140793, 1e-9);
}

TEST(Exponents, SphereEigenvalues) {
    EXPECT_EQ(sphere_eigenvalue(0, 7), 0.0);
    EXPECT_EQ(sphere_eigenvalue(1, 5), 4.0);
    EXPECT_EQ(sphere_eigenvalue(2, 5), 10.0);
}

TEST(Exponents, OriginRootsHandValues) {
    const auto r0 = indicial_roots_origin(2.0, 5, 0);
    EXPECT_NEAR(r0.minus.real(), -1.5, 1e-14);
    EXPECT_NEAR(r0.plus.real(), -1.5, 1e-14);
    EXPECT_NEAR(r0.plus.imag(), std::sqrt(7.0) / 2.0, 1e-14);
    EXPECT_NEAR(r0.minus.imag(), -std::sqrt(7.0) / 2.0, 1e-14);
    EXPECT_FALSE(r0.degenerate);

    const auto r1 = indicial_roots_origin(2.0, 5, 1);
    EXPECT_NEAR(r1.minus.real(), -3.0, 1e-14);
    EXPECT_NEAR(r1.plus.real(), 0.0, 1e-14);
    EXPECT_EQ(r1.plus.imag(), 0.0);

    const auto d = indicial_roots_origin(1.8, 5, 0);
    EXPECT_TRUE(d.degenerate);
    EXPECT_NEAR(d.minus.real(), -1.5, 1e-7);
    EXPECT_NEAR(d.plus.real(), -1.5, 1e-7);
}

TEST(Exponents, InfinityRoots) {
    auto r = indicial_roots_infinity(5, 0);
    EXPECT_DOUBLE_EQ(r.plus, 0.0);
    EXPECT_DOUBLE_EQ(r.minus, -3.0);
    r = indicial_roots_infinity(5, 1);
    EXPECT_DOUBLE_EQ(r.plus, 1.0);
    EXPECT_DOUBLE_EQ(r.minus, -4.0);
    r = indicial_roots_infinity(4, 0);
    EXPECT_DOUBLE_EQ(r.plus, 0.0);
    EXPECT_DOUBLE_EQ(r.minus, -2.0);
}

TEST(Exponents, WeightWindowHandValues) {
    auto w = weight_window(2.0, 5);
    EXPECT_NEAR(w.nu_lo, -2.0, 1e-15);
    EXPECT_NEAR(w.nu_hi, -1.5, 1e-14);
    EXPECT_DOUBLE_EQ(w.mu_for(-1.75), -1.25);

    w = weight_window(1.8, 5);
    EXPECT_NEAR(w.nu_lo, -2.5, 1e-14);
    EXPECT_NEAR(w.nu_hi, -1.5, 1e-7);

    EXPECT_NO_THROW(validate_weights(2.0, 5, -1.75, -1.25));
    EXPECT_THROW(validate_weights(2.0, 5, -1.4, -1.6), ValidationError);
    EXPECT_THROW(validate_weights(2.0, 5, -1.75, -1.2), ValidationError);
    EXPECT_THROW(validate_weights(2.0, 5, -2.1, -0.9), ValidationError);
}

TEST(Exponents, DeltaExponent) {
    EXPECT_DOUBLE_EQ(delta_exponent(0.0, 5, 0), 1.5);
    EXPECT_DOUBLE_EQ(delta_exponent(4.0, 5, 0), 0.0);
    EXPECT_DOUBLE_EQ(delta_exponent(4.0, 5, 1), 1.5);
}

TEST(Exponents, EquivariantParams) {
    auto s = equivariant_params(7, 2);
    EXPECT_EQ(s.N, 5);
    EXPECT_NEAR(s.p, 1.8, 1e-15);
    EXPECT_TRUE(s.admissible);
    EXPECT_NEAR(s.critical_exponent, 10.0 / 3.0, 1e-12);

    EXPECT_FALSE(equivariant_params(6, 2).admissible);

    s = equivariant_params(10, 3);
    EXPECT_EQ(s.N, 7);
    EXPECT_NEAR(s.p, 1.5, 1e-15);
    EXPECT_TRUE(s.admissible);

    EXPECT_THROW(equivariant_params(4, 2), ValidationError);
}

TEST(ExponentsProperty, RootSumAndProductOnGrid) {
    for (int N = 3; N < 53; ++N) {
        for (int i = 0; i < 50; ++i) {
            const double p = grid_p(N, i);
            const double Ap = potential_constant(p, N);
            for (int j = 0; j <= 10; ++j) {
                const auto r = indicial_roots_origin(p, N, j);
                const complex sum = r.plus + r.minus;
                const complex prod = r.plus * r.minus;
                const double scale = std::max(1.0, std::abs(Ap - sphere_eigenvalue(j, N)));
                ASSERT_NEAR(sum.real(), 2.0 - N, 1e-12) << "N=" << N << " p=" << p << " j=" << j;
                ASSERT_NEAR(sum.imag(), 0.0, 1e-12);
                ASSERT_NEAR(prod.real(), Ap - sphere_eigenvalue(j, N), 1e-12 * scale);
                ASSERT_NEAR(prod.imag(), 0.0, 1e-12 * scale);
            }
        }
    }
}

TEST(ExponentsProperty, InequalityChainOnGrid) {
    for (int N = 3; N < 53; ++N) {
        for (int i = 0; i < 50; ++i) {
            const double p = grid_p(N, i);
            ASSERT_TRUE(indicial_chain_holds(p, N, 10)) << "N=" << N << " p=" << p;
            const auto r = indicial_roots_origin(p, N, 0);
            const double disc = (N - 2.0) * (N - 2.0) - 4.0 * potential_constant(p, N);
            if (disc <= 0.0) {
                ASSERT_EQ(r.minus.real(), r.plus.real());
            } else {
                ASSERT_LT(r.minus.real(), r.plus.real());
            }
        }
    }
}

TEST(ExponentsProperty, WindowNeverEmpty) {
    for (int N = 3; N < 53; ++N) {
        for (int i = 0; i < 50; ++i) {
            const auto w = weight_window(grid_p(N, i), N);
            ASSERT_FALSE(w.empty());
            // the midpoint pair satisfies every inequality except possibly root exclusion
            const double nu = w.midpoint();
            ASSERT_LT(indicial_roots_origin(grid_p(N, i), N, 0).plus.real(), w.mu_for(nu));
            ASSERT_LT(w.mu_for(nu), 0.0);
        }
    }
}

TEST(ExponentsProperty, AdmissibleEquivariantLandsInWindow) {
    for (int n = 4; n < 40; ++n) {
        for (int k = 1; n - k > 2; ++k) {
            const auto s = equivariant_params(n, k);
            if (s.admissible) {
                ASSERT_TRUE(in_exponent_window(s.p, s.N)) << "n=" << n << " k=" << k;
            }
        }
    }
}
