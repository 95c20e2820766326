#pragma once

// Lagrange P1/P2 discretization of the Steklov problem
//   -div grad u = 0 in the domain, du/dn = sigma u on the boundary,
// solved by condensing the interior unknowns onto the boundary.

#include "steklov/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <cstddef>
#include <vector>

namespace steklov {

using SparseMatrix = Eigen::SparseMatrix<double>;

class FemSpace {
public:
    FemSpace(TriangleMesh mesh, int order);

    const TriangleMesh& mesh() const noexcept { return mesh_; }
    int order() const noexcept { return order_; }
    std::size_t dof_count() const noexcept { return dof_count_; }

    /// Local dofs of triangle t: three vertex dofs, then (order 2) the
    /// midpoint dofs of the edges opposite vertex 0, 1, 2.
    const std::array<int, 6>& cell_dofs(std::size_t t) const { return cell_dofs_[t]; }

    /// Boundary dofs in loop order. For boundary edge k, entry order*k is the
    /// dof of its start vertex and (order 2) entry 2k+1 its midpoint.
    const std::vector<int>& boundary_dofs() const noexcept { return boundary_dofs_; }
    /// Arclength from the start of the loop to each boundary dof.
    const std::vector<double>& boundary_arc() const noexcept { return boundary_arc_; }
    /// Position of every dof.
    const std::vector<Vec2>& dof_points() const noexcept { return dof_points_; }

    std::size_t boundary_edge_count() const noexcept { return mesh_.boundary_edges.size(); }
    /// Positions in boundary_dofs() of the nodes of boundary edge k: start,
    /// (midpoint,) end.
    std::array<std::size_t, 3> boundary_edge_nodes(std::size_t k) const;
    double boundary_edge_length(std::size_t k) const;

private:
    TriangleMesh mesh_;
    int order_;
    std::size_t dof_count_ = 0;
    std::vector<std::array<int, 6>> cell_dofs_;
    std::vector<int> boundary_dofs_;
    std::vector<double> boundary_arc_;
    std::vector<Vec2> dof_points_;
};

struct SteklovMatrices {
    SparseMatrix K; ///< stiffness
    SparseMatrix B; ///< boundary mass
};

SteklovMatrices assemble(const FemSpace& space);

/// Eigenpairs of K u = sigma B u with u harmonic in the discrete sense.
struct SteklovSpectrum {
    Eigen::VectorXd eigenvalues;
    /// Boundary values, one column per eigenvalue, rows follow
    /// FemSpace::boundary_dofs(). Columns are B-orthonormal.
    Eigen::MatrixXd traces;
    /// Tangential derivative at boundary dofs (average of the one-sided values
    /// at vertices).
    Eigen::MatrixXd tangential;
    /// Full discrete harmonic extensions, one column per eigenvalue.
    Eigen::MatrixXd functions;
    /// Boundary edge lengths and node positions copied from the space, so the
    /// spectrum can be integrated without it.
    int order = 2;
    std::vector<double> edge_lengths;

    std::size_t size() const noexcept { return static_cast<std::size_t>(eigenvalues.size()); }
    double sigma(std::size_t j) const { return eigenvalues[static_cast<Eigen::Index>(j)]; }

    /// Trace value and tangential derivative of eigenfunction j on boundary
    /// edge k at local parameter s in [0, 1].
    void edge_eval(std::size_t k, std::size_t j, double s, double& u, double& u_tau) const;
};

/// Both methods work on the Schur complement S = K_bb - K_bi K_ii^{-1} K_ib.
///   Dense:  S is formed and S y = sigma B_bb y is solved by LAPACK;
///           cubic in the number of boundary dofs.
///   Krylov: block Krylov iteration on (S + tau B_bb)^{-1} B_bb applied
///           through one sparse factorization of K + tau B; S is never formed.
enum class EigenMethod { Krylov, Dense };

/// Smallest m+1 Steklov eigenpairs (sigma_0 = 0 included). Throws SolverFailure
/// when a factorization fails or the residual check fails.
SteklovSpectrum solve_spectrum(const FemSpace& space, const SteklovMatrices& mats, std::size_t m,
                               EigenMethod method = EigenMethod::Krylov);

/// Mesh, space, assembly and solve in one call.
SteklovSpectrum steklov_spectrum(const TriangleMesh& mesh, std::size_t m, int order = 2,
                                 EigenMethod method = EigenMethod::Krylov);

/// v^T K v / v^T B v. Throws ZeroBoundaryTrace when the denominator vanishes.
double rayleigh_quotient(const SteklovMatrices& mats, const Eigen::VectorXd& v);

} // namespace steklov
