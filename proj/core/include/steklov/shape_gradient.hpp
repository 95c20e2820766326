#pragma once

// Hadamard derivatives of Steklov eigenvalues on polygonal domains. Normal
// velocities are given per polyline vertex and interpolated linearly along
// each polyline edge (hat functions chi_i), including across boundary nodes
// inserted by the mesher.

#include "steklov/fem.hpp"
#include "steklov/geometry.hpp"
#include "steklov/mesh.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <vector>

namespace steklov {

inline constexpr double kClusterTol = 1e-3;

/// Turning angle at each vertex divided by half the adjacent edge lengths;
/// positive at counterclockwise-convex corners.
Eigen::VectorXd polyline_curvature(const BoundaryPolyline& b);

/// Bundles a polyline, its mesh and the solved spectrum. All references must
/// outlive the object.
class ShapeSensitivity {
public:
    ShapeSensitivity(const BoundaryPolyline& b, const TriangleMesh& mesh, const SteklovSpectrum& spec);

    const Eigen::VectorXd& curvature() const noexcept { return H_; }
    const SteklovSpectrum& spectrum() const noexcept { return spec_; }

    /// Relative gap of sigma_k to its neighbours; throws ClusteredEigenvalue
    /// when either gap is below tol.
    void require_simple(std::size_t k, double tol = kClusterTol) const;

    /// Derivative of a simple sigma_k for the normal velocity with vertex values vn.
    double derivative(std::size_t k, std::span<const double> vn, double tol = kClusterTol) const;
    /// Same for a deformation field given by one vector per polyline vertex.
    double derivative(std::size_t k, std::span<const Vec2> field, double tol = kClusterTol) const;

    /// Cluster matrix M_ab over eigenpairs first..last (inclusive).
    Eigen::MatrixXd cluster_matrix(std::size_t first, std::size_t last, std::span<const double> vn) const;
    Eigen::MatrixXd cluster_matrix(std::size_t first, std::size_t last, std::span<const Vec2> field) const;

    /// Cluster matrices for every hat function chi_i (normal velocity chi_i).
    std::vector<Eigen::MatrixXd> hat_matrices(std::size_t first, std::size_t last) const;
    /// Cluster matrices for V = chi_i * direction.
    std::vector<Eigen::MatrixXd> hat_matrices(std::size_t first, std::size_t last, const Vec2& direction) const;

private:
    std::vector<Eigen::MatrixXd> integrate(std::size_t first, std::size_t last, const Vec2* direction) const;

    const BoundaryPolyline& b_;
    const TriangleMesh& mesh_;
    const SteklovSpectrum& spec_;
    Eigen::VectorXd H_;
};

/// dF_k/dp_i with the normal velocity chi_i. For a clustered sigma_k the
/// entry is the smallest eigenvalue of the cluster matrix for chi_i, taken over
/// the cluster members with index >= k.
Eigen::VectorXd support_gradient(const ShapeSensitivity& s, std::size_t k, double tol = kClusterTol);

/// Eigenpairs j with index >= k and sigma_j <= sigma_k (1 + tol): the members of
/// a cluster seen from its lowest branch k. Returns the last index.
std::size_t cluster_end(const SteklovSpectrum& spec, std::size_t k, double tol = kClusterTol);

} // namespace steklov
