#include "checks.hpp"

#include "steklov/errors.hpp"
#include "steklov/mesh.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

using namespace steklov;

namespace {

void expect_valid(const TriangleMesh& m, const BoundaryPolyline& b, double h) {
    EXPECT_NEAR(m.area(), b.signed_area(), 1e-10 * std::abs(b.signed_area()));
    EXPECT_LE(m.max_edge_length(), h * (1 + 1e-9));
    for (std::size_t t = 0; t < m.triangle_count(); ++t) EXPECT_GT(m.triangle_area(t), 0.0);
    // Boundary loop closes and visits each boundary vertex once.
    std::set<int> seen;
    for (std::size_t k = 0; k < m.boundary_edges.size(); ++k) {
        const auto& e = m.boundary_edges[k];
        EXPECT_EQ(e[1], m.boundary_edges[(k + 1) % m.boundary_edges.size()][0]);
        EXPECT_TRUE(seen.insert(e[0]).second);
    }
    // Input vertices are kept and mapped.
    ASSERT_EQ(m.boundary_vertex_map.size(), b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
        EXPECT_NEAR((m.vertices[static_cast<std::size_t>(m.boundary_vertex_map[i])] - b[i]).norm(), 0.0, 1e-12);
    }
    // Euler characteristic of a disk: V - E + T = 1.
    EXPECT_EQ(static_cast<long>(m.vertex_count()) - static_cast<long>(m.edge_count()) +
                  static_cast<long>(m.triangle_count()),
              1);
}

} // namespace

TEST(Triangulate, SquareMeetsSizeAndAngle) {
    BoundaryPolyline sq{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
    const TriangleMesh m = triangulate(sq, 0.1);
    expect_valid(m, sq, 0.1);
    EXPECT_GE(m.min_angle_deg(), 20.0);
}

TEST(Triangulate, DiskPolygon) {
    const BoundaryPolyline b = reconstruct_boundary(SupportVector::constant(200, 1.0));
    const TriangleMesh m = triangulate(b, 0.1);
    expect_valid(m, b, 0.1);
    EXPECT_GE(m.min_angle_deg(), 20.0);
}

TEST(Triangulate, NonConvexLShape) {
    BoundaryPolyline l{{{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}};
    const TriangleMesh m = triangulate(l, 0.2);
    expect_valid(m, l, 0.2);
    EXPECT_GE(m.min_angle_deg(), 20.0);
}

TEST(Triangulate, ThinRectangle) {
    const BoundaryPolyline r = checks::rectangle(2.0, 0.1, 20);
    const TriangleMesh m = triangulate(r, 0.05);
    expect_valid(m, r, 0.05);
}

TEST(Triangulate, SharpInputCornerIsKept) {
    // A 10 degree spike cannot be meshed with 20 degree angles at its tip;
    // only triangles touching that corner may be sharper.
    const double a = 10.0 * std::numbers::pi / 180.0;
    BoundaryPolyline b{{{0, 0}, {2, 0}, {2 * std::cos(a), 2 * std::sin(a)}}};
    const TriangleMesh m = triangulate(b, 0.3);
    expect_valid(m, b, 0.3);
}

TEST(Triangulate, ScaleAndTranslationCovariant) {
    const BoundaryPolyline b = reconstruct_boundary(checks::ellipse_support(80, 1.0, 0.6));
    const TriangleMesh m1 = triangulate(b, 0.15);
    BoundaryPolyline moved = b.scaled(3.0);
    for (Vec2& v : moved.vertices) v += Vec2(10.0, -4.0);
    const TriangleMesh m2 = triangulate(moved, 0.45);
    EXPECT_EQ(m1.vertex_count(), m2.vertex_count());
    EXPECT_EQ(m1.triangle_count(), m2.triangle_count());
}

TEST(Triangulate, VertexBudget) {
    BoundaryPolyline sq{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
    MeshOptions opts;
    opts.target_h = 0.01;
    opts.max_vertices = 100;
    EXPECT_THROW(triangulate(sq, opts), MeshFailure);
}

TEST(CheckSimple, DetectsBowtie) {
    BoundaryPolyline bow{{{0, 0}, {1, 1}, {1, 0}, {0, 1}}};
    EXPECT_THROW(check_simple(bow), SelfIntersection);
    EXPECT_THROW(triangulate(bow, 0.1), SelfIntersection);
    BoundaryPolyline sq{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
    EXPECT_NO_THROW(check_simple(sq));
}

TEST(CheckSimple, DetectsFoldBack) {
    BoundaryPolyline fold{{{0, 0}, {2, 0}, {1, 0}, {1, 1}}};
    EXPECT_THROW(check_simple(fold), SelfIntersection);
}

TEST(DeformTo, SameConnectivityOnTarget) {
    const auto sv = checks::ellipse_support(60, 1.0, 0.6);
    const BoundaryPolyline b = reconstruct_boundary(sv);
    const TriangleMesh m = triangulate(b, 0.15);
    const BoundaryPolyline target = b.scaled(1.1);
    const TriangleMesh d = deform_to(m, target);
    EXPECT_EQ(d.triangles, m.triangles);
    EXPECT_NEAR(d.area(), target.signed_area(), 1e-10);
    for (std::size_t i = 0; i < target.size(); ++i) {
        EXPECT_NEAR((d.vertices[static_cast<std::size_t>(d.boundary_vertex_map[i])] - target[i]).norm(), 0.0, 1e-12);
    }
    // A pure dilation of the boundary extends harmonically to a dilation.
    for (std::size_t v = 0; v < m.vertex_count(); ++v) EXPECT_NEAR((d.vertices[v] - 1.1 * m.vertices[v]).norm(), 0.0, 1e-10);
}

TEST(WriteOff, Format) {
    BoundaryPolyline tri{{{0, 0}, {1, 0}, {0, 1}}};
    const TriangleMesh m = triangulate(tri, 10.0);
    std::ostringstream os;
    write_off(os, m);
    std::istringstream is(os.str());
    std::string head;
    std::size_t nv = 0, nt = 0, ne = 0;
    is >> head >> nv >> nt >> ne;
    EXPECT_EQ(head, "OFF");
    EXPECT_EQ(nv, m.vertex_count());
    EXPECT_EQ(nt, m.triangle_count());
}
