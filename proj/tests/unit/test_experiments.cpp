#include "steklov/experiments.hpp"

#include "checks.hpp"
#include "steklov/errors.hpp"
#include "steklov/mesh.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace steklov;

TEST(Constants, UnitBallVolumes) {
    EXPECT_DOUBLE_EQ(unit_ball_volume(0), 1.0);
    EXPECT_DOUBLE_EQ(unit_ball_volume(1), 2.0);
    EXPECT_NEAR(unit_ball_volume(2), std::numbers::pi, 1e-15);
    EXPECT_NEAR(unit_ball_volume(3), 4.0 * std::numbers::pi / 3.0, 1e-14);
}

TEST(Constants, WallisIntegralsMatchQuadrature) {
    for (int p = 0; p <= 8; ++p) {
        // Composite Simpson on [0, pi].
        const int n = 2000;
        const double h = std::numbers::pi / n;
        double s = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            s += w * std::pow(std::sin(i * h), p);
        }
        EXPECT_NEAR(wallis_integral(p), s * h / 3.0, 1e-10) << p;
    }
}

TEST(Constants, BoundConstantInThePlane) {
    // omega_0 = 1, omega_1 = 2: C_2 = 1 and C(2, k) = [2(k+1)]^3 / 4.
    EXPECT_DOUBLE_EQ(lateral_perimeter_constant(2), 1.0);
    EXPECT_DOUBLE_EQ(derive_bound_constant(1).value, 16.0);
    EXPECT_DOUBLE_EQ(derive_bound_constant(2).value, 54.0);
    EXPECT_DOUBLE_EQ(derive_bound_constant(3).value, 128.0);
    for (std::size_t k = 1; k <= 10; ++k) {
        EXPECT_DOUBLE_EQ(derive_bound_constant(k).value, 2.0 * std::pow(static_cast<double>(k + 1), 3));
    }
    EXPECT_THROW(derive_bound_constant(0), Error);
}

TEST(Constants, PerturbationConstantFormulaInThePlane) {
    // (d-1) pi / (2 omega_d) with an empty product at d = 2.
    EXPECT_DOUBLE_EQ(perturbation_constant(2), 0.5);
    EXPECT_DOUBLE_EQ(predicted_disk_slope(1.0, 1.0), 3.0);
    EXPECT_DOUBLE_EQ(predicted_disk_slope(1.0, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(predicted_disk_slope(0.0, 0.0), 0.0);
}

TEST(Constants, PredictedSlopeIsLinear) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int i = 0; i < 10; ++i) {
        const double a = u(rng), b = u(rng), c = u(rng), d = u(rng), t = u(rng);
        EXPECT_NEAR(predicted_disk_slope(a + t * c, b + t * d),
                    predicted_disk_slope(a, b) + t * predicted_disk_slope(c, d), 1e-12);
    }
}

TEST(CheckBound, UnitDiskMargin) {
    const BoundCheck c = check_bound(1.0, std::numbers::pi, 2.0, 1);
    EXPECT_TRUE(c.passed);
    EXPECT_NEAR(c.bound, 2 * std::numbers::pi, 1e-12);
    EXPECT_NEAR(c.margin, 1.0 / (2 * std::numbers::pi), 1e-12);
}

TEST(CheckBound, ThinRectangle) {
    const BoundaryPolyline r = checks::rectangle(2.0, 0.1, 20);
    const SteklovSpectrum s = steklov_spectrum(triangulate(r, 0.05), 3);
    const BoundCheck c = check_bound(r, s, 1);
    EXPECT_NEAR(c.bound, 16.0 * 0.2 / std::pow(std::hypot(2.0, 0.1), 3), 1e-12);
    EXPECT_TRUE(c.passed) << c.sigma << " vs " << c.bound;
}

TEST(PerturbedDisk, ZeroAmplitudeIsTheDisk) {
    PerturbationSpec spec;
    spec.a2 = spec.a4 = 0.0;
    const BoundaryPolyline b = perturbed_disk(spec, 0.02);
    for (const Vec2& v : b.vertices) EXPECT_NEAR(v.norm(), 1.0, 1e-15);
    const SlopeReport rep = disk_perturbation_slope(spec);
    EXPECT_NEAR(rep.measured, 0.0, 1e-6);
}

TEST(PerturbationSpec, Validation) {
    PerturbationSpec spec;
    spec.epsilons = {0.01, 0.005};
    EXPECT_THROW(spec.validate(), Error);
    spec.epsilons = {0.01, 0.1};
    EXPECT_THROW(spec.validate(), Error);
}

// Independent oracle for the slope: first-order perturbation of the double
// eigenvalue 1 of the unit disk under the normal velocity a2 cos2t + a4 cos4t.
// The cluster matrix over (cos t, sin t) / sqrt(pi) is diag(-3/2, 3/2) a2 (the
// cos4t part integrates to zero), so sigma_1 = 1 - 1.5 |a2| eps, while the
// diameter is 2 (1 + eps (a2 + a4)) when a2 + a4 > 0 is the largest radius.
// Hence d(D sigma_1)/d eps = 2 (a2 + a4) - 3 a2 = 2 (a4 - a2 / 2).
TEST(DiskPerturbationSlope, MatchesHadamardOracle) {
    for (const auto& [a2, a4] : {std::pair{1.0, 1.0}, std::pair{1.0, 0.0}, std::pair{0.5, 1.0}}) {
        PerturbationSpec spec;
        spec.a2 = a2;
        spec.a4 = a4;
        spec.epsilons = {0.0025, 0.005, 0.01, 0.02};
        const SlopeReport rep = disk_perturbation_slope(spec);
        const double oracle = 2.0 * (a4 - 0.5 * a2);
        EXPECT_NEAR(rep.measured, oracle, 0.05 * std::abs(oracle)) << a2 << " " << a4;
    }
}

TEST(DiskPerturbationSlope, MeasuredSlopeIsNearlyLinearInAmplitudes) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.2, 1.0);
    PerturbationSpec base;
    base.a2 = 1.0;
    base.a4 = 0.0;
    const double s2 = disk_perturbation_slope(base).measured;
    base.a2 = 0.0;
    base.a4 = 1.0;
    const double s4 = disk_perturbation_slope(base).measured;
    for (int i = 0; i < 3; ++i) {
        PerturbationSpec spec;
        spec.a2 = u(rng);
        spec.a4 = u(rng) + spec.a2; // a4 > a2 keeps the theta = 0 radius the largest
        const double combined = disk_perturbation_slope(spec).measured;
        const double linear = spec.a2 * s2 + spec.a4 * s4;
        EXPECT_NEAR(combined, linear, 0.15 * std::abs(linear));
    }
}

TEST(DiskPerturbationSlope, ScaleInvariantSamples) {
    PerturbationSpec spec;
    const SlopeReport unit = disk_perturbation_slope(spec);
    spec.radius = 3.0;
    const SlopeReport big = disk_perturbation_slope(spec);
    ASSERT_EQ(unit.samples.size(), big.samples.size());
    for (std::size_t i = 0; i < unit.samples.size(); ++i) {
        EXPECT_NEAR(big.samples[i].second, unit.samples[i].second, 1e-6 * unit.samples[i].second);
    }
}

TEST(Multiplicity, DiskGaps) {
    const SteklovSpectrum s =
        steklov_spectrum(triangulate(reconstruct_boundary(SupportVector::constant(200, 1.0)), 0.1), 4);
    const MultiplicityReport k1 = multiplicity_report(s, 1);
    EXPECT_LT(k1.upper_gap, 1e-3);
    const MultiplicityReport k2 = multiplicity_report(s, 2);
    EXPECT_NEAR(k2.upper_gap, 1.0, 1e-2);
    EXPECT_LT(k2.lower_gap, 1e-3);
}
