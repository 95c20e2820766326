#pragma once

// Discrete support functions of planar convex bodies, boundary reconstruction,
// linear constraint residuals and the polygon diameter with its one-sided
// directional derivative.

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace steklov {

using Vec2 = Eigen::Vector2d;

/// Uniform grid theta_i = i * step on [0, 2pi). The count is even so that
/// theta_i + pi is again a grid angle.
class AngleGrid {
public:
    explicit AngleGrid(std::size_t n_angles);

    std::size_t size() const noexcept { return n_; }
    double step() const noexcept { return h_; }
    double theta(std::size_t i) const noexcept { return h_ * static_cast<double>(i); }
    std::size_t opposite(std::size_t i) const noexcept { return (i + n_ / 2) % n_; }
    std::size_t next(std::size_t i) const noexcept { return (i + 1) % n_; }
    std::size_t prev(std::size_t i) const noexcept { return (i + n_ - 1) % n_; }

private:
    std::size_t n_;
    double h_;
};

/// Sampled support function p_i = p(theta_i).
struct SupportVector {
    AngleGrid grid;
    Eigen::VectorXd p;

    SupportVector(AngleGrid g, Eigen::VectorXd values);

    static SupportVector constant(std::size_t n_angles, double radius);
    /// Samples an arbitrary support function on the grid.
    template <class F>
    static SupportVector sample(std::size_t n_angles, F&& f) {
        AngleGrid g(n_angles);
        Eigen::VectorXd v(static_cast<Eigen::Index>(n_angles));
        for (std::size_t i = 0; i < n_angles; ++i) v[static_cast<Eigen::Index>(i)] = f(g.theta(i));
        return SupportVector(g, std::move(v));
    }

    std::size_t size() const noexcept { return grid.size(); }
    double operator[](std::size_t i) const { return p[static_cast<Eigen::Index>(i)]; }
};

/// Closed counterclockwise vertex loop; the closing edge is implicit.
struct BoundaryPolyline {
    std::vector<Vec2> vertices;

    std::size_t size() const noexcept { return vertices.size(); }
    const Vec2& operator[](std::size_t i) const { return vertices[i]; }
    const Vec2& vertex(std::size_t i) const { return vertices[i % vertices.size()]; }
    std::size_t next(std::size_t i) const noexcept { return (i + 1) % vertices.size(); }
    std::size_t prev(std::size_t i) const noexcept { return (i + vertices.size() - 1) % vertices.size(); }

    double signed_area() const;
    double perimeter() const;
    /// True when every turn is non-negative (counterclockwise convex).
    bool is_convex() const;
    BoundaryPolyline scaled(double t) const;
};

struct DiameterReport {
    double diameter = 0.0;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

inline constexpr double kDefaultPairTol = 1e-8;

/// x_i = p_i cos(theta_i) - p'_i sin(theta_i), y_i = p_i sin(theta_i) + p'_i cos(theta_i)
/// with p' by centered differences. Throws DegenerateBoundary when two
/// consecutive vertices coincide.
BoundaryPolyline reconstruct_boundary(const SupportVector& sv);

/// p_i + (p_{i+1} + p_{i-1} - 2 p_i) / h^2, indices cyclic. Non-negative
/// residuals mean a discretely convex support function.
Eigen::VectorXd convexity_residuals(const SupportVector& sv);

/// Width rows p_i + p_{i+N/2} for i < N/2 (first N/2 entries) followed by the
/// anchor sum p_0 + p_{N/2}. Callers compare against the diameter bound.
Eigen::VectorXd width_values(const SupportVector& sv);

/// Signed slacks: d - width_i for the N/2 width rows and (p_0 + p_{N/2}) - d for
/// the anchor row. Non-negative means satisfied.
Eigen::VectorXd diameter_slacks(const SupportVector& sv, double d);

/// Maximum vertex distance. Rotating calipers when the polyline is convex,
/// all-pairs scan otherwise.
DiameterReport compute_diameter(const BoundaryPolyline& b, double pair_tol = kDefaultPairTol);
DiameterReport compute_diameter_brute_force(const BoundaryPolyline& b,
                                            double pair_tol = kDefaultPairTol);

/// Right derivative of the diameter along the per-vertex displacement field:
/// (1/D) max over diameter pairs of <Q_i - Q_j, V_i - V_j>.
double diameter_directional_derivative(const BoundaryPolyline& b, const DiameterReport& rep,
                                       std::span<const Vec2> field);

/// Outward unit normal of polyline edge i (from vertex i to i+1).
Vec2 edge_normal(const BoundaryPolyline& b, std::size_t i);

} // namespace steklov
