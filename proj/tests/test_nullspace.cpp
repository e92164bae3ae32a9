#include <gtest/gtest.h>

#include <cmath>

#include "sylab/nullspace.hpp"

using namespace sylab;

namespace {

ProfilePtr model_profile() {
    static ProfilePtr prof = make_profile(2.0, 5, 1.0);
    return prof;
}

}  // namespace

TEST(Nullspace, ModelParsing) {
    EXPECT_EQ(parse_nullspace_model("L1"), NullspaceModel::L1);
    EXPECT_EQ(parse_nullspace_model("model_Ap"), NullspaceModel::ModelAp);
    EXPECT_EQ(parse_nullspace_model("laplace"), NullspaceModel::Laplace);
    EXPECT_THROW(parse_nullspace_model("heat"), ValidationError);
}

TEST(Nullspace, CoreOscillationFrequency) {
    // Im gamma_0^+ = sqrt(7)/2 for (p, N) = (2, 5)
    const double want = std::sqrt(7.0) / 2.0;
    const auto model = nullspace_scan(-1.25, 2.0, 5, NullspaceModel::ModelAp, 0);
    EXPECT_NEAR(model.oscillation_frequency / want, 1.0, 1e-3);
    const auto full = nullspace_scan(-1.25, 2.0, 5, NullspaceModel::L1, 0, model_profile());
    EXPECT_NEAR(full.oscillation_frequency / want, 1.0, 0.01);
}

TEST(Nullspace, NoBoundedKernelAtTheLowerWeight) {
    for (auto m : {NullspaceModel::L1, NullspaceModel::ModelAp}) {
        const auto rep = nullspace_scan(-1.25, 2.0, 5, m, 5, model_profile());
        ASSERT_EQ(rep.modes.size(), 6u);
        EXPECT_GT(rep.min_mismatch, 1e-3);
        // mode 0 decays like r^{-3/2} at the core, slower than r^{-5/4} allows
        EXPECT_TRUE(rep.modes[0].vacuous);
        for (int j = 1; j <= 5; ++j) EXPECT_EQ(rep.modes[j].admissible, 1) << j;
    }
}

TEST(Nullspace, HarmonicNegativeControl) {
    // r Y_1 is harmonic and bounded by r^1 at both ends
    const auto rep = nullspace_scan(1.0, 2.0, 5, NullspaceModel::Laplace, 3, nullptr, true);
    EXPECT_LE(rep.modes[1].mismatch, 1e-6);
    EXPECT_LE(rep.min_mismatch, 1e-6);
    EXPECT_GT(rep.modes[2].mismatch, 1e-3);
}

TEST(Nullspace, IndicialWeightIsRejected) {
    EXPECT_THROW(nullspace_scan(-1.5, 2.0, 5, NullspaceModel::ModelAp, 2), ValidationError);
    EXPECT_THROW(nullspace_scan(1.0, 2.0, 5, NullspaceModel::Laplace, 2), ValidationError);
    EXPECT_THROW(nullspace_scan(-1.25, 2.0, 5, NullspaceModel::L1, 2), ValidationError);  // no profile
    EXPECT_THROW(nullspace_scan(-1.25, 3.0, 5, NullspaceModel::ModelAp, 2), ValidationError);  // p out of window
}

TEST(Stability, AnchorExponents) {
    EXPECT_NEAR(delta_exponent(0.0, 5, 0), 1.5, 1e-12);
    EXPECT_NEAR(delta_exponent(4.0, 5, 0), 0.0, 1e-12);
    EXPECT_NEAR(delta_exponent(4.0, 5, 1), 1.5, 1e-12);
}

TEST(Stability, RatioSettlesUnderRefinement) {
    const auto flat = appendix_stability_probe(0.0, -2.0, 5, -3.0);
    EXPECT_TRUE(flat.passed()) << flat.variation;
    const auto shifted = appendix_stability_probe(4.0, -0.3, 5, -1.0);
    EXPECT_TRUE(shifted.passed()) << shifted.variation;
    for (const auto* rep : {&flat, &shifted}) {
        ASSERT_EQ(rep->levels.size(), 5u);
        EXPECT_GE(rep->nearest_indicial, kStabilityExclusion);
        for (const auto& lv : rep->levels) EXPECT_GT(lv.ratio, 0.0);
    }
}

TEST(Stability, IndicialDeltaIsRejected) {
    // delta_1 = 5/2 for d = 0, N = 5
    EXPECT_THROW(appendix_stability_probe(0.0, 2.5, 5, -3.0), ValidationError);
    EXPECT_THROW(appendix_stability_probe(0.0, -1.5 + 0.01, 5, -3.0), ValidationError);
}

TEST(Stability, ZeroAmplitudeIsVacuous) {
    const auto rep = appendix_stability_probe(0.0, -2.0, 5, -3.0, 5, 0, 0.0);
    EXPECT_TRUE(rep.vacuous);
    EXPECT_TRUE(rep.passed());
    EXPECT_TRUE(rep.levels.empty());
}
