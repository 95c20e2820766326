#pragma once

// Maximization of sigma_k under a diameter constraint.
//   convex mode:     variables are support values p_i on the angle grid, the
//                    feasible set is the convexity/width/anchor/positivity
//                    polyhedron;
//   non-convex mode: variables are the values of a lower and an upper graph
//                    over [-d/2, d/2] with fixed zero endpoints.
// Each iteration solves a small QP for the ascent direction of the lowest
// branch of the eigenvalue cluster starting at k, then backtracks.

#include "steklov/geometry.hpp"
#include "steklov/mesh.hpp"
#include "steklov/fem.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace steklov {

enum class ConstraintTag { Convexity, Width, Anchor, Positivity, Order, Box };
enum class Sense { LessEqual, GreaterEqual };

std::string to_string(ConstraintTag tag);

/// Rows coeffs(r, :) x  (<= or >=)  bounds(r).
struct LinearConstraintSet {
    Eigen::MatrixXd coeffs;
    Eigen::VectorXd bounds;
    std::vector<Sense> senses;
    std::vector<ConstraintTag> tags;

    std::size_t rows() const noexcept { return tags.size(); }
    std::size_t count(ConstraintTag tag) const;
    void add(const Eigen::VectorXd& row, double bound, Sense sense, ConstraintTag tag);

    /// Signed slack per row, non-negative when satisfied.
    Eigen::VectorXd residuals(const Eigen::VectorXd& x) const;
    /// Number of rows with |slack| <= tol.
    std::size_t active_count(const Eigen::VectorXd& x, double tol = 1e-9) const;
    /// Columns n_r and values b_r with n_r^T x >= b_r, the form used by solve_qp.
    /// An anchor row and a width row with identical coefficients and bound are
    /// merged into one equality column placed first; returns the number of
    /// leading equality columns.
    int as_greater_equal(Eigen::MatrixXd& C, Eigen::VectorXd& b) const;
};

struct OptimOptions {
    std::size_t n_angles = 200;
    double diameter = 2.0;
    std::size_t k = 1;
    int max_iters = 500;
    /// Initial trust parameter of the QP step (length^2 per eigenvalue unit).
    double step0 = 0.05;
    /// Length (times d) of the first-difference penalty in the step metric;
    /// zero gives the plain boundary-weighted metric.
    double smoothing = 0.1;
    double backtrack = 0.5;
    double armijo = 1e-4;
    /// Stop when the relative objective change over stop_window accepted
    /// iterations falls below stop_tol.
    double stop_tol = 1e-7;
    int stop_window = 10;
    double cluster_tol = 1e-3;
    /// Eigenvalues within this relative distance above sigma_k enter the
    /// ascent model.
    double cluster_window = 0.05;
    double mesh_factor = 0.05;
    /// p_i >= positivity_factor * d.
    double positivity_factor = 1e-3;
    /// Convexity residuals >= convexity_floor_factor * d.
    double convexity_floor_factor = 1e-4;
    /// Minimum vertical gap q_i - p_i in non-convex mode, times d.
    double gap_factor = 1e-3;
    int restarts = 3;
    std::uint64_t seed = 0;
    int element_order = 2;
    /// Tab-separated per-iteration log when non-null.
    std::ostream* log = nullptr;

    void validate() const;
};

/// Lower graph p_i and upper graph q_i at x_i = -d/2 + i d/(N+1), i = 1..N.
struct GraphPair {
    double diameter = 2.0;
    Eigen::VectorXd p;
    Eigen::VectorXd q;

    std::size_t size() const noexcept { return static_cast<std::size_t>(p.size()); }
    double abscissa(std::size_t i) const;
    /// Counterclockwise loop (-d/2,0), lower graph left to right, (d/2,0),
    /// upper graph right to left.
    BoundaryPolyline boundary() const;
    /// Polyline vertex index of p_i (i in 0..N-1) and q_i.
    static std::size_t lower_vertex(std::size_t i) { return i + 1; }
    std::size_t upper_vertex(std::size_t i) const { return 2 * size() + 1 - i; }

    static GraphPair disk(std::size_t n, double diameter);
    /// Samples a polygon whose horizontal extent is `diameter` at the graph
    /// abscissae, after moving its leftmost and rightmost vertices to
    /// (-d/2, 0) and (d/2, 0) by a translation and a vertical shear. Throws
    /// when the extent differs from d by more than 1e-6 d or a vertical line
    /// meets the boundary more than twice.
    static GraphPair from_boundary(const BoundaryPolyline& b, std::size_t n, double diameter);
};

struct HistoryEntry {
    int iteration = 0;
    double sigma = 0.0;
    double objective = 0.0; ///< sigma_k * D
    double step = 0.0;
    std::size_t active_rows = 0;
    std::size_t cluster_size = 1;
};

/// Spectrum and geometry of one candidate domain.
struct Evaluation {
    BoundaryPolyline boundary;
    TriangleMesh mesh;
    SteklovSpectrum spectrum;
    DiameterReport diameter;
    double area = 0.0;
    double sigma = 0.0;     ///< sigma_k
    double objective = 0.0; ///< sigma_k * D
};

enum class Mode { Convex, NonConvex };

struct OptimState {
    Mode mode = Mode::Convex;
    Eigen::VectorXd x; ///< support values, or [p; q] in non-convex mode
    std::vector<HistoryEntry> history;
    int iterations = 0;
    bool converged = false;
    std::string stop_reason;
    Evaluation best;
    /// Bound check sigma_k <= 2(k+1)^3 |Omega| / D^3 held at every accepted iterate.
    bool bound_held = true;
    /// Non-convex mode: final caliper diameter <= d (1 + 1e-3).
    bool diameter_ok = true;
    std::size_t rejected_candidates = 0;

    SupportVector support(std::size_t n_angles) const;
    GraphPair graphs(double diameter) const;
};

/// Meshes and solves a polyline: mesh size mesh_h, eigenpairs 0..m.
Evaluation evaluate(const BoundaryPolyline& b, std::size_t k, std::size_t m, double mesh_h, int order = 2);
/// Same on a given mesh of b.
Evaluation evaluate(const BoundaryPolyline& b, TriangleMesh mesh, std::size_t k, std::size_t m, int order = 2);

LinearConstraintSet build_constraints(const OptimOptions& opts);
LinearConstraintSet build_graph_constraints(std::size_t n, const OptimOptions& opts);

/// Euclidean projection onto the polyhedron. Throws ProjectionFailure.
Eigen::VectorXd project(const Eigen::VectorXd& x, const LinearConstraintSet& cons);

/// Projected ascent from a support vector (projected onto the feasible set first).
OptimState ascend(const SupportVector& initial, const OptimOptions& opts);
/// Ascent over two graphs; the final diameter is checked against d (1 + 1e-3).
OptimState ascend_nonconvex(const GraphPair& initial, const OptimOptions& opts);

/// Runs `ascend` from the disk and from opts.restarts seeded random feasible
/// perturbations of it; returns the best final state.
OptimState optimize_convex(const OptimOptions& opts);
/// Same over graph pairs; the convex-mode optimum (single start) is used as an
/// additional starting point.
OptimState optimize_nonconvex(const OptimOptions& opts);

/// dF/dq for graph variables [p; q] via V = (0, chi_i). Requires sigma_k simple
/// unless tol is zero.
Eigen::VectorXd graph_gradient(const GraphPair& g, const Evaluation& ev, std::size_t k,
                               double tol = 1e-3);

} // namespace steklov
