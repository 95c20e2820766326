#pragma once

#include "steklov/geometry.hpp"

#include <array>
#include <cstddef>
#include <iosfwd>
#include <vector>

namespace steklov {

/// Where a boundary mesh vertex sits on the input polyline: on edge `segment`
/// (from polyline vertex `segment` to `segment + 1`) at parameter t in [0, 1).
struct BoundaryLocation {
    std::size_t segment = 0;
    double t = 0.0;
};

struct TriangleMesh {
    std::vector<Vec2> vertices;
    /// Counterclockwise vertex triples.
    std::vector<std::array<int, 3>> triangles;
    /// Closed counterclockwise loop; boundary_edges[k][1] == boundary_edges[k+1][0].
    std::vector<std::array<int, 2>> boundary_edges;
    /// Location of boundary_edges[k][0] on the source polyline.
    std::vector<BoundaryLocation> boundary_locations;
    /// Polyline vertex index -> mesh vertex index.
    std::vector<int> boundary_vertex_map;

    std::size_t vertex_count() const noexcept { return vertices.size(); }
    std::size_t triangle_count() const noexcept { return triangles.size(); }
    std::size_t edge_count() const;

    double triangle_area(std::size_t t) const;
    double area() const;
    double max_edge_length() const;
    /// Smallest interior angle over all triangles, in degrees.
    double min_angle_deg() const;

    TriangleMesh scaled(double t) const;
};

struct MeshOptions {
    double target_h = 0.1;
    double min_angle_deg = 20.0;
    std::size_t max_vertices = 50000;
};

/// Throws SelfIntersection unless no two non-adjacent edges meet and no two
/// adjacent edges fold back onto each other.
void check_simple(const BoundaryPolyline& b);

/// Constrained Delaunay triangulation of the polygon interior refined until
/// every triangle has minimum angle >= opts.min_angle_deg and longest edge
/// <= opts.target_h. Input vertices are kept; long boundary edges are split.
/// The triangulation is computed on a normalized integer lattice so the result
/// does not depend on translation or scale of the input (up to rounding of the
/// lattice coordinates). Throws MeshFailure when the vertex budget is hit.
TriangleMesh triangulate(const BoundaryPolyline& b, const MeshOptions& opts);
TriangleMesh triangulate(const BoundaryPolyline& b, double target_h);

/// Same connectivity, boundary moved onto `target` (polyline vertices map to
/// polyline vertices, inserted boundary vertices keep their edge parameter) and
/// interior vertices placed by the discrete harmonic extension of the boundary
/// displacement.
TriangleMesh deform_to(const TriangleMesh& mesh, const BoundaryPolyline& target);

/// Applies x -> x + V(x) to every vertex.
template <class Field>
TriangleMesh displaced(const TriangleMesh& mesh, Field&& V) {
    TriangleMesh out = mesh;
    for (Vec2& x : out.vertices) x = x + V(x);
    return out;
}

/// OFF-style text: "OFF", "<V> <T> 0", vertex lines "x y 0", triangle lines "3 a b c".
void write_off(std::ostream& os, const TriangleMesh& mesh);

} // namespace steklov
