#pragma once

// Dense strictly convex quadratic programs
//   minimize 1/2 x^T G x + a^T x  subject to  C^T x >= b
// where the first n_eq columns of C are equalities, solved by the
// Goldfarb-Idnani dual active-set method.

#include <Eigen/Core>

#include <vector>

namespace steklov {

struct QpResult {
    Eigen::VectorXd x;
    double objective = 0.0;
    /// Indices of the constraints active at the solution.
    std::vector<int> active;
    /// Lagrange multipliers of the active constraints (same order).
    std::vector<double> multipliers;
    int iterations = 0;
};

/// G must be symmetric positive definite; C holds one constraint per column.
/// Throws ProjectionFailure when the constraints are infeasible or the
/// iteration cap (default 10 * (n + m)) is reached.
QpResult solve_qp(const Eigen::MatrixXd& G, const Eigen::VectorXd& a, const Eigen::MatrixXd& C,
                  const Eigen::VectorXd& b, int n_eq = 0, int max_iterations = 0);

} // namespace steklov
