#include "steklov/errors.hpp"
#include "steklov/qp.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace steklov;

TEST(SolveQp, UnconstrainedMinimum) {
    Eigen::Matrix2d G;
    G << 2, 0, 0, 4;
    const Eigen::Vector2d a(-2, -8);
    const QpResult r = solve_qp(G, a, Eigen::MatrixXd(2, 0), Eigen::VectorXd(0));
    EXPECT_NEAR(r.x[0], 1.0, 1e-12);
    EXPECT_NEAR(r.x[1], 2.0, 1e-12);
    EXPECT_TRUE(r.active.empty());
}

TEST(SolveQp, ProjectionOntoHalfPlane) {
    // min |x - (2, 2)|^2 s.t. x + y <= 2  ->  (1, 1), multiplier 1.
    const Eigen::Matrix2d G = Eigen::Matrix2d::Identity();
    const Eigen::Vector2d a(-2, -2);
    Eigen::MatrixXd C(2, 1);
    C << -1, -1;
    Eigen::VectorXd b(1);
    b << -2;
    const QpResult r = solve_qp(G, a, C, b);
    EXPECT_NEAR(r.x[0], 1.0, 1e-12);
    EXPECT_NEAR(r.x[1], 1.0, 1e-12);
    ASSERT_EQ(r.active.size(), 1u);
    EXPECT_NEAR(r.multipliers[0], 1.0, 1e-12);
}

TEST(SolveQp, EqualityConstraint) {
    const Eigen::Matrix3d G = Eigen::Matrix3d::Identity();
    const Eigen::Vector3d a = Eigen::Vector3d::Zero();
    Eigen::MatrixXd C(3, 1);
    C << 1, 1, 1;
    Eigen::VectorXd b(1);
    b << 3;
    const QpResult r = solve_qp(G, a, C, b, 1);
    EXPECT_NEAR((r.x - Eigen::Vector3d::Ones()).norm(), 0.0, 1e-12);
}

TEST(SolveQp, InfeasibleThrows) {
    const Eigen::Matrix2d G = Eigen::Matrix2d::Identity();
    Eigen::MatrixXd C(2, 2);
    C << 1, -1, 0, 0;
    Eigen::VectorXd b(2);
    b << 1, 0; // x >= 1 and -x >= 0
    EXPECT_THROW(solve_qp(G, Eigen::Vector2d::Zero(), C, b), ProjectionFailure);
}

TEST(SolveQp, KktConditionsOnRandomBoxProblems) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0, 1);
    for (int trial = 0; trial < 20; ++trial) {
        const int dim = 6;
        Eigen::MatrixXd A(dim, dim);
        for (int i = 0; i < dim * dim; ++i) A.data()[i] = n(rng);
        const Eigen::MatrixXd G = A * A.transpose() + Eigen::MatrixXd::Identity(dim, dim);
        Eigen::VectorXd a(dim);
        for (int i = 0; i < dim; ++i) a[i] = 3 * n(rng);
        // Box -1 <= x <= 1.
        Eigen::MatrixXd C(dim, 2 * dim);
        C << Eigen::MatrixXd::Identity(dim, dim), -Eigen::MatrixXd::Identity(dim, dim);
        const Eigen::VectorXd b = -Eigen::VectorXd::Ones(2 * dim);
        const QpResult r = solve_qp(G, a, C, b);
        EXPECT_GE((C.transpose() * r.x - b).minCoeff(), -1e-10);
        Eigen::VectorXd lagr = G * r.x + a;
        for (std::size_t j = 0; j < r.active.size(); ++j) {
            EXPECT_GE(r.multipliers[j], -1e-10);
            lagr -= r.multipliers[j] * C.col(r.active[j]);
        }
        EXPECT_LT(lagr.norm(), 1e-9);
    }
}
