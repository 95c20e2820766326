#include "checks.hpp"

#include "steklov/errors.hpp"
#include "steklov/geometry.hpp"
#include "steklov/predicates.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace steklov;

TEST(AngleGrid, OppositeAndNeighbours) {
    const AngleGrid g(8);
    EXPECT_DOUBLE_EQ(g.step(), std::numbers::pi / 4);
    EXPECT_EQ(g.opposite(1), 5u);
    EXPECT_EQ(g.opposite(6), 2u);
    EXPECT_EQ(g.next(7), 0u);
    EXPECT_EQ(g.prev(0), 7u);
}

TEST(AngleGrid, RejectsOddCount) { EXPECT_THROW(AngleGrid(7), Error); }

TEST(Reconstruct, ConstantSupportGivesRegularPolygonOnCircle) {
    const BoundaryPolyline b = reconstruct_boundary(SupportVector::constant(64, 1.5));
    ASSERT_EQ(b.size(), 64u);
    for (std::size_t i = 0; i < b.size(); ++i) {
        EXPECT_NEAR(b[i].norm(), 1.5, 1e-12);
        EXPECT_NEAR(std::atan2(b[i].y(), b[i].x()), std::remainder(2 * std::numbers::pi * i / 64.0, 2 * std::numbers::pi),
                    1e-12);
    }
    EXPECT_GT(b.signed_area(), 0.0);
    EXPECT_TRUE(b.is_convex());
}

TEST(Reconstruct, TranslationAddsLinearTermToSupport) {
    // p(theta) + <c, u(theta)> is the support function of the body shifted by c.
    const Vec2 c(0.3, -0.2);
    const auto base = checks::ellipse_support(100, 1.0, 0.6);
    const auto shifted = SupportVector::sample(100, [&](double t) {
        return std::sqrt(std::cos(t) * std::cos(t) + 0.36 * std::sin(t) * std::sin(t)) + c.x() * std::cos(t) +
               c.y() * std::sin(t);
    });
    const BoundaryPolyline a = reconstruct_boundary(base);
    const BoundaryPolyline b = reconstruct_boundary(shifted);
    // The centered difference scales the derivative of <c, u> by sin(h)/h.
    const double h = AngleGrid(100).step();
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LE((b[i] - a[i] - c).norm(), c.norm() * h * h / 6.0);
}

TEST(Reconstruct, CoincidentVerticesThrow) {
    // Support of the origin: every vertex collapses onto it.
    EXPECT_THROW(reconstruct_boundary(SupportVector::constant(16, 0.0)), DegenerateBoundary);
}

TEST(ConvexityResiduals, DiskAndEllipse) {
    const auto disk = SupportVector::constant(40, 0.7);
    EXPECT_NEAR((convexity_residuals(disk).array() - 0.7).abs().maxCoeff(), 0.0, 1e-12);
    // rho = p + p'' > 0 for the ellipse; the discrete version tracks it to O(h^2).
    const auto ell = checks::ellipse_support(200, 1.0, 0.6);
    const Eigen::VectorXd rho = convexity_residuals(ell);
    EXPECT_GT(rho.minCoeff(), 0.0);
    // Curvature radius at theta = 0 is b^2 / a = 0.36.
    EXPECT_NEAR(rho[0], 0.36, 1e-3);
}

TEST(ConvexityResiduals, DetectsNonConvexSupport) {
    const auto sv = SupportVector::sample(40, [](double t) { return 1.0 + 0.2 * std::cos(4 * t); });
    // rho = 1 + 0.2 cos4t - 3.2 cos 4t dips below zero.
    EXPECT_LT(convexity_residuals(sv).minCoeff(), 0.0);
}

TEST(WidthValues, DiskWidthIsDiameter) {
    const auto sv = SupportVector::constant(20, 1.0);
    const Eigen::VectorXd w = width_values(sv);
    ASSERT_EQ(w.size(), 11);
    EXPECT_NEAR((w.array() - 2.0).abs().maxCoeff(), 0.0, 1e-15);
    const Eigen::VectorXd s = diameter_slacks(sv, 2.5);
    EXPECT_NEAR(s[0], 0.5, 1e-15);
    EXPECT_NEAR(s[10], -0.5, 1e-15);
}

TEST(Polyline, ShoelaceAndPerimeterOfUnitSquare) {
    BoundaryPolyline sq{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
    EXPECT_DOUBLE_EQ(sq.signed_area(), 1.0);
    EXPECT_DOUBLE_EQ(sq.perimeter(), 4.0);
    EXPECT_TRUE(sq.is_convex());
    EXPECT_DOUBLE_EQ(sq.scaled(3.0).signed_area(), 9.0);
    EXPECT_TRUE(edge_normal(sq, 0).isApprox(Vec2(0, -1)));
}

TEST(Diameter, SquareHasTwoDiagonalPairs) {
    BoundaryPolyline sq{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
    const DiameterReport rep = compute_diameter(sq);
    EXPECT_NEAR(rep.diameter, std::sqrt(2.0), 1e-15);
    EXPECT_EQ(rep.pairs.size(), 2u);
}

TEST(Diameter, NonConvexUsesAllPairs) {
    BoundaryPolyline l{{{0, 0}, {3, 0}, {3, 1}, {1, 1}, {1, 2}, {0, 2}}};
    EXPECT_FALSE(l.is_convex());
    EXPECT_NEAR(compute_diameter(l).diameter, std::sqrt(13.0), 1e-15);
}

TEST(Diameter, CalipersMatchBruteForceOnRandomConvexPolygons) {
    const auto res = checks::calipers_vs_brute_force(5, 100);
    EXPECT_TRUE(res.passed) << res.detail;
}

TEST(Diameter, DirectionalDerivativeOfDilationIsDiameter) {
    const BoundaryPolyline b = reconstruct_boundary(checks::ellipse_support(60, 1.0, 0.6));
    const DiameterReport rep = compute_diameter(b);
    EXPECT_NEAR(diameter_directional_derivative(b, rep, b.vertices), rep.diameter, 1e-12);
    const std::vector<Vec2> shift(b.size(), Vec2(1.0, 2.0));
    EXPECT_NEAR(diameter_directional_derivative(b, rep, shift), 0.0, 1e-12);
}

TEST(Diameter, DirectionalDerivativeTakesMaxOverPairs) {
    // Square: stretching x only moves one diagonal pair's length at rate
    // <Q_i - Q_j, V_i - V_j> / D, and the max is taken over both diagonals.
    BoundaryPolyline sq{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
    const DiameterReport rep = compute_diameter(sq);
    std::vector<Vec2> field{{0, 0}, {0, 0}, {0, 0}, {0, 1}};
    // Only vertex 3 moves up: diagonal (1,3) lengthens at rate 1/sqrt(2), (0,2) is unchanged.
    EXPECT_NEAR(diameter_directional_derivative(sq, rep, field), 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(Predicates, OrientationSigns) {
    EXPECT_EQ(orient2d({0, 0}, {1, 0}, {0, 1}), 1);
    EXPECT_EQ(orient2d({0, 0}, {0, 1}, {1, 0}), -1);
    EXPECT_EQ(orient2d({0, 0}, {1, 1}, {2, 2}), 0);
    // Nearly collinear points where naive evaluation loses the sign.
    const Vec2 a(0.5, 0.5), b(12.0, 12.0), c(24.0, 24.0);
    EXPECT_EQ(orient2d(a, b, c), 0);
    const Vec2 c2(24.0, std::nextafter(24.0, 25.0));
    EXPECT_EQ(orient2d(a, b, c2), 1);
}

TEST(Predicates, OrientationIsAntisymmetricUnderSwap) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 200; ++i) {
        const Vec2 a(u(rng), u(rng)), b(u(rng), u(rng)), c(u(rng), u(rng));
        EXPECT_EQ(orient2d(a, b, c), -orient2d(b, a, c));
        EXPECT_EQ(orient2d(a, b, c), orient2d(b, c, a));
    }
}

TEST(Predicates, SegmentIntersection) {
    EXPECT_TRUE(segments_intersect({0, 0}, {2, 2}, {0, 2}, {2, 0}));
    EXPECT_FALSE(segments_intersect({0, 0}, {1, 0}, {0, 1}, {1, 1}));
    EXPECT_TRUE(segments_intersect({0, 0}, {1, 0}, {1, 0}, {2, 1}));    // touching endpoint
    EXPECT_TRUE(segments_intersect({0, 0}, {2, 0}, {1, 0}, {3, 0}));    // collinear overlap
    EXPECT_FALSE(segments_intersect({0, 0}, {1, 0}, {2, 0}, {3, 0}));   // collinear, disjoint
}
