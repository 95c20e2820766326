#include "checks.hpp"

#include "steklov/errors.hpp"
#include "steklov/shape_gradient.hpp"

#include <Eigen/Eigenvalues>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace steklov;

namespace {

struct Disk {
    BoundaryPolyline b = reconstruct_boundary(SupportVector::constant(200, 1.0));
    TriangleMesh mesh = triangulate(b, 0.1);
    SteklovSpectrum spec = steklov_spectrum(mesh, 5);
};

const Disk& disk() {
    static const Disk d;
    return d;
}

} // namespace

TEST(Curvature, RegularPolygonApproximatesInverseRadius) {
    const BoundaryPolyline b = reconstruct_boundary(SupportVector::constant(100, 2.0));
    const Eigen::VectorXd H = polyline_curvature(b);
    EXPECT_NEAR(H.minCoeff(), 0.5, 1e-3);
    EXPECT_NEAR(H.maxCoeff(), 0.5, 1e-3);
    // Total turning is 2 pi.
    double turning = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        turning += H[static_cast<Eigen::Index>(i)] * 0.5 * ((b[i] - b[b.prev(i)]).norm() + (b[b.next(i)] - b[i]).norm());
    }
    EXPECT_NEAR(turning, 2 * std::numbers::pi, 1e-12);
}

TEST(ShapeSensitivity, ClusteredEigenvalueThrows) {
    const ShapeSensitivity s(disk().b, disk().mesh, disk().spec);
    EXPECT_THROW(s.require_simple(1), ClusteredEigenvalue);
    std::vector<double> vn(disk().b.size(), 1.0);
    EXPECT_THROW(s.derivative(1, std::span<const double>(vn)), ClusteredEigenvalue);
    EXPECT_EQ(cluster_end(disk().spec, 1), 2u);
    EXPECT_EQ(cluster_end(disk().spec, 3), 4u);
}

TEST(ShapeSensitivity, DiskClusterMatrixForCos2Theta) {
    // Oracle: M_ab = int (u_a' u_b' - sigma^2 u_a u_b - sigma H u_a u_b) cos(2t) dt
    // with u = cos t / sqrt(pi), sin t / sqrt(pi), sigma = H = 1, evaluated by
    // the trapezoidal rule (exact for trigonometric polynomials).
    const int n = 64;
    Eigen::Matrix2d oracle = Eigen::Matrix2d::Zero();
    for (int q = 0; q < n; ++q) {
        const double t = 2 * std::numbers::pi * q / n;
        const Eigen::Vector2d u(std::cos(t), std::sin(t));
        const Eigen::Vector2d ut(-std::sin(t), std::cos(t));
        oracle += (ut * ut.transpose() - 2.0 * u * u.transpose()) * std::cos(2 * t) * (2 * std::numbers::pi / n) /
                  std::numbers::pi;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> oracle_eig(oracle);
    EXPECT_NEAR(oracle_eig.eigenvalues()[0], -1.5, 1e-12);
    EXPECT_NEAR(oracle_eig.eigenvalues()[1], 1.5, 1e-12);

    const ShapeSensitivity s(disk().b, disk().mesh, disk().spec);
    std::vector<double> vn;
    const AngleGrid g(200);
    for (std::size_t i = 0; i < 200; ++i) vn.push_back(std::cos(2 * g.theta(i)));
    const Eigen::MatrixXd M = s.cluster_matrix(1, 2, std::span<const double>(vn));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
    EXPECT_NEAR(eig.eigenvalues()[0], oracle_eig.eigenvalues()[0], 2e-2);
    EXPECT_NEAR(eig.eigenvalues()[1], oracle_eig.eigenvalues()[1], 2e-2);
}

TEST(ShapeSensitivity, DiskClusterMatrixOfDilationIsMinusSigma) {
    const ShapeSensitivity s(disk().b, disk().mesh, disk().spec);
    const Eigen::MatrixXd M = s.cluster_matrix(1, 2, std::span<const Vec2>(disk().b.vertices));
    EXPECT_NEAR((M + disk().spec.sigma(1) * Eigen::MatrixXd::Identity(2, 2)).norm(), 0.0, 2e-3);
}

TEST(ShapeSensitivity, HatMatricesSumToUniformNormalVelocity) {
    const ShapeSensitivity s(disk().b, disk().mesh, disk().spec);
    const auto hats = s.hat_matrices(1, 2);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(2, 2);
    for (const auto& h : hats) sum += h;
    std::vector<double> ones(disk().b.size(), 1.0);
    EXPECT_NEAR((sum - s.cluster_matrix(1, 2, std::span<const double>(ones))).norm(), 0.0, 1e-12);
}

TEST(ShapeSensitivity, TranslationAndDilationIdentities) {
    const auto res = checks::derivative_identities(1e-2);
    EXPECT_TRUE(res.passed) << res.detail;
}

TEST(ShapeSensitivity, MatchesFiniteDifferencesOnEllipse) {
    const auto res = checks::gradient_vs_fd(99, 4, 3e-2);
    EXPECT_TRUE(res.passed) << res.detail;
}

TEST(SupportGradient, DiskEntriesAreEqualBySymmetry) {
    const ShapeSensitivity s(disk().b, disk().mesh, disk().spec);
    // k = 3 starts the cluster {2, 2}; every hat gives the same lowest branch.
    const Eigen::VectorXd g = support_gradient(s, 3);
    EXPECT_LT(g.maxCoeff() - g.minCoeff(), 1e-3 * std::abs(g.mean()) + 1e-6);
}
