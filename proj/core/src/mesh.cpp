#include "steklov/mesh.hpp"

#include "steklov/errors.hpp"
#include "steklov/predicates.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>

namespace steklov {

// ---------------------------------------------------------------------------
// TriangleMesh

std::size_t TriangleMesh::edge_count() const {
    std::set<std::pair<int, int>> edges;
    for (const auto& t : triangles) {
        for (int i = 0; i < 3; ++i) edges.insert(std::minmax(t[i], t[(i + 1) % 3]));
    }
    return edges.size();
}

double TriangleMesh::triangle_area(std::size_t t) const {
    const auto& tri = triangles[t];
    const Vec2 u = vertices[tri[1]] - vertices[tri[0]];
    const Vec2 v = vertices[tri[2]] - vertices[tri[0]];
    return 0.5 * (u.x() * v.y() - u.y() * v.x());
}

double TriangleMesh::area() const {
    double a = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t) a += triangle_area(t);
    return a;
}

double TriangleMesh::max_edge_length() const {
    double m = 0.0;
    for (const auto& t : triangles) {
        for (int i = 0; i < 3; ++i) m = std::max(m, (vertices[t[i]] - vertices[t[(i + 1) % 3]]).norm());
    }
    return m;
}

double TriangleMesh::min_angle_deg() const {
    double m = 180.0;
    for (const auto& t : triangles) {
        for (int i = 0; i < 3; ++i) {
            const Vec2 u = vertices[t[(i + 1) % 3]] - vertices[t[i]];
            const Vec2 v = vertices[t[(i + 2) % 3]] - vertices[t[i]];
            const double ang = std::atan2(std::abs(u.x() * v.y() - u.y() * v.x()), u.dot(v));
            m = std::min(m, ang * 180.0 / std::numbers::pi);
        }
    }
    return m;
}

TriangleMesh TriangleMesh::scaled(double t) const {
    TriangleMesh out = *this;
    for (Vec2& v : out.vertices) v *= t;
    return out;
}

void write_off(std::ostream& os, const TriangleMesh& mesh) {
    os << "OFF\n" << mesh.vertices.size() << ' ' << mesh.triangles.size() << " 0\n";
    os.precision(17);
    for (const Vec2& v : mesh.vertices) os << v.x() << ' ' << v.y() << " 0\n";
    for (const auto& t : mesh.triangles) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

// ---------------------------------------------------------------------------
// Simplicity

void check_simple(const BoundaryPolyline& b) {
    const std::size_t n = b.size();
    if (n < 3) throw DegenerateBoundary("polyline needs at least 3 vertices");

    struct Box {
        double x0, x1, y0, y1;
    };
    std::vector<Box> boxes(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = b[i];
        const Vec2& q = b[b.next(i)];
        boxes[i] = {std::min(p.x(), q.x()), std::max(p.x(), q.x()), std::min(p.y(), q.y()),
                    std::max(p.y(), q.y())};
    }
    for (std::size_t i = 0; i < n; ++i) {
        // Adjacent edges only meet at the shared vertex unless they fold back.
        const Vec2& a = b[i];
        const Vec2& m = b[b.next(i)];
        const Vec2& c = b[b.next(b.next(i))];
        if (orient2d(a, m, c) == 0 && (m - a).dot(c - m) < 0.0) throw SelfIntersection(i, b.next(i));

        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;
            const Box& bi = boxes[i];
            const Box& bj = boxes[j];
            if (bi.x1 < bj.x0 || bj.x1 < bi.x0 || bi.y1 < bj.y0 || bj.y1 < bi.y0) continue;
            if (segments_intersect(b[i], b[b.next(i)], b[j], b[b.next(j)])) throw SelfIntersection(i, j);
        }
    }
}

// ---------------------------------------------------------------------------
// Constrained Delaunay refinement on an integer lattice.

namespace {

using i64 = std::int64_t;
using i128 = __int128;

constexpr double kLattice = 33554432.0; // 2^25 lattice units per normalized half-extent
constexpr i64 kSuper = i64{1} << 28;

struct IPt {
    i64 x = 0;
    i64 y = 0;
    bool operator==(const IPt&) const = default;
};

inline int sgn(i128 v) { return (v > 0) - (v < 0); }

inline int orient(const IPt& a, const IPt& b, const IPt& c) {
    const i128 d = static_cast<i128>(b.x - a.x) * (c.y - a.y) - static_cast<i128>(b.y - a.y) * (c.x - a.x);
    return sgn(d);
}

// > 0 when d lies strictly inside the circumcircle of the counterclockwise triangle (a, b, c).
inline int incircle(const IPt& a, const IPt& b, const IPt& c, const IPt& d) {
    const i128 adx = a.x - d.x, ady = a.y - d.y;
    const i128 bdx = b.x - d.x, bdy = b.y - d.y;
    const i128 cdx = c.x - d.x, cdy = c.y - d.y;
    const i128 alift = adx * adx + ady * ady;
    const i128 blift = bdx * bdx + bdy * bdy;
    const i128 clift = cdx * cdx + cdy * cdy;
    const i128 det = alift * (bdx * cdy - bdy * cdx) + blift * (cdx * ady - cdy * adx) +
                     clift * (adx * bdy - ady * bdx);
    return sgn(det);
}

// Strictly inside the diametral circle of segment (a, b).
inline bool encroaches(const IPt& a, const IPt& b, const IPt& p) {
    const i128 d = static_cast<i128>(a.x - p.x) * (b.x - p.x) + static_cast<i128>(a.y - p.y) * (b.y - p.y);
    return d < 0 && !(p == a) && !(p == b);
}

inline double dist2(const IPt& a, const IPt& b) {
    const double dx = static_cast<double>(a.x - b.x);
    const double dy = static_cast<double>(a.y - b.y);
    return dx * dx + dy * dy;
}

enum class VKind { Super, Input, Segment, Interior };

struct VInfo {
    VKind kind;
    std::size_t index; // polyline vertex (Input) or polyline edge (Segment)
};

struct Tri {
    std::array<int, 3> v{};
    std::array<int, 3> nb{-1, -1, -1}; // nb[i] is across the edge opposite v[i]
    std::array<bool, 3> seg{false, false, false};
    bool alive = true;

    int slot(int vertex) const {
        for (int i = 0; i < 3; ++i) {
            if (v[i] == vertex) return i;
        }
        return -1;
    }
};

enum class Where { Inside, OnEdge, OnVertex, Blocked };

struct Location {
    int tri = -1;
    Where where = Where::Inside;
    int slot = -1;
};

inline std::uint64_t edge_key(int a, int b) {
    const auto [lo, hi] = std::minmax(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(lo)) << 32) |
           static_cast<std::uint32_t>(hi);
}

class Refiner {
public:
    Refiner(const BoundaryPolyline& b, const MeshOptions& opts) : poly_(b), opts_(opts) {
        Vec2 lo = b[0], hi = b[0];
        for (const Vec2& v : b.vertices) {
            lo = lo.cwiseMin(v);
            hi = hi.cwiseMax(v);
        }
        center_ = 0.5 * (lo + hi);
        scale_ = 0.5 * std::max(hi.x() - lo.x(), hi.y() - lo.y());
        if (!(scale_ > 0.0)) throw MeshFailure("polyline has zero extent");
        const double units = kLattice / scale_;
        h2_ = opts.target_h * units;
        h2_ *= h2_;
        min_angle_ = opts.min_angle_deg * std::numbers::pi / 180.0;
    }

    TriangleMesh run() {
        build_conforming();
        remove_exterior();
        refine();
        return extract();
    }

private:
    // -- lattice ----------------------------------------------------------
    IPt to_lattice(const Vec2& x) const {
        const Vec2 u = (x - center_) / scale_ * kLattice;
        return {static_cast<i64>(std::llround(u.x())), static_cast<i64>(std::llround(u.y()))};
    }
    Vec2 from_lattice(const IPt& p) const {
        return center_ + Vec2(static_cast<double>(p.x), static_cast<double>(p.y)) / kLattice * scale_;
    }

    int add_vertex(const IPt& p, VInfo info) {
        if (pts_.size() >= opts_.max_vertices + 3) {
            throw MeshFailure("vertex budget of " + std::to_string(opts_.max_vertices) + " exceeded");
        }
        pts_.push_back(p);
        info_.push_back(info);
        vtri_.push_back(-1);
        return static_cast<int>(pts_.size()) - 1;
    }

    int new_tri() {
        tris_.emplace_back();
        return static_cast<int>(tris_.size()) - 1;
    }

    void set_tri(int t, int a, int b, int c, int na, int nb, int nc, bool sa, bool sb, bool sc) {
        Tri& T = tris_[t];
        T.v = {a, b, c};
        T.nb = {na, nb, nc};
        T.seg = {sa, sb, sc};
        T.alive = true;
        vtri_[a] = vtri_[b] = vtri_[c] = t;
        touched_.push_back(t);
    }

    void relink(int n, int old_t, int new_t) {
        if (n < 0) return;
        for (int i = 0; i < 3; ++i) {
            if (tris_[n].nb[i] == old_t) {
                tris_[n].nb[i] = new_t;
                return;
            }
        }
    }

    // Slot of the edge {a, b} in triangle t (the slot of the opposite vertex), or -1.
    int edge_slot(int t, int a, int b) const {
        const Tri& T = tris_[t];
        for (int i = 0; i < 3; ++i) {
            const int x = T.v[(i + 1) % 3];
            const int y = T.v[(i + 2) % 3];
            if ((x == a && y == b) || (x == b && y == a)) return i;
        }
        return -1;
    }

    std::vector<int> triangles_around(int a) const {
        std::vector<int> out;
        const int start = vtri_[a];
        if (start < 0) return out;
        int t = start;
        // Counterclockwise sweep, then clockwise if a boundary was hit.
        bool closed = false;
        for (std::size_t guard = 0; guard < tris_.size() + 1; ++guard) {
            out.push_back(t);
            const int s = tris_[t].slot(a);
            const int n = tris_[t].nb[(s + 1) % 3];
            if (n < 0) break;
            if (n == start) {
                closed = true;
                break;
            }
            t = n;
        }
        if (closed) return out;
        t = start;
        for (std::size_t guard = 0; guard < tris_.size() + 1; ++guard) {
            const int s = tris_[t].slot(a);
            const int n = tris_[t].nb[(s + 2) % 3];
            if (n < 0 || n == start) break;
            t = n;
            out.push_back(t);
        }
        return out;
    }

    // -- point location -----------------------------------------------------
    Location classify(int t, const IPt& p) const {
        const Tri& T = tris_[t];
        int zeros = 0, zslot = -1, nonzero_slot = -1;
        for (int i = 0; i < 3; ++i) {
            const int o = orient(pts_[T.v[(i + 1) % 3]], pts_[T.v[(i + 2) % 3]], p);
            if (o < 0) return {t, Where::Blocked, i};
            if (o == 0) {
                ++zeros;
                zslot = i;
            } else {
                nonzero_slot = i;
            }
        }
        if (zeros == 0) return {t, Where::Inside, -1};
        if (zeros == 1) return {t, Where::OnEdge, zslot};
        return {t, Where::OnVertex, nonzero_slot};
    }

    Location locate(const IPt& p, int start) {
        int t = start;
        const std::size_t limit = 4 * tris_.size() + 64;
        for (std::size_t step = 0; step < limit; ++step) {
            const Tri& T = tris_[t];
            int cross = -1;
            const int first = static_cast<int>((rng_ = rng_ * 6364136223846793005ULL + 1442695040888963407ULL) >> 62) % 3;
            for (int k = 0; k < 3; ++k) {
                const int i = (first + k) % 3;
                if (orient(pts_[T.v[(i + 1) % 3]], pts_[T.v[(i + 2) % 3]], p) < 0) {
                    cross = i;
                    break;
                }
            }
            if (cross < 0) return classify(t, p);
            if (T.nb[cross] < 0) return {t, Where::Blocked, cross};
            t = T.nb[cross];
        }
        return locate_brute_force(p);
    }

    Location locate_brute_force(const IPt& p) const {
        for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
            if (!tris_[t].alive) continue;
            Location loc = classify(t, p);
            if (loc.where != Where::Blocked) return loc;
        }
        return {-1, Where::Blocked, -1};
    }

    // -- elementary operations ------------------------------------------------
    void split_triangle(int t, int p) {
        const Tri T = tris_[t];
        const int a = T.v[0], b = T.v[1], c = T.v[2];
        const int t1 = new_tri();
        const int t2 = new_tri();
        set_tri(t, p, b, c, T.nb[0], t1, t2, T.seg[0], false, false);
        set_tri(t1, p, c, a, T.nb[1], t2, t, T.seg[1], false, false);
        set_tri(t2, p, a, b, T.nb[2], t, t1, T.seg[2], false, false);
        relink(T.nb[1], t, t1);
        relink(T.nb[2], t, t2);
        vtri_[p] = t;
        legalize_stack_.insert(legalize_stack_.end(), {t, t1, t2});
    }

    // Splits the edge opposite slot s of triangle t by vertex p (p on that edge,
    // or just inside t when the edge is a boundary segment).
    void split_edge(int t, int s, int p) {
        const Tri T = tris_[t];
        const int a = T.v[s];
        const int b = T.v[(s + 1) % 3];
        const int c = T.v[(s + 2) % 3];
        const int nab = T.nb[(s + 2) % 3];
        const int nca = T.nb[(s + 1) % 3];
        const bool sab = T.seg[(s + 2) % 3];
        const bool sca = T.seg[(s + 1) % 3];
        const bool sbc = T.seg[s];
        const int u = T.nb[s];

        const int t1 = new_tri();
        if (u < 0) {
            set_tri(t, a, b, p, -1, t1, nab, sbc, false, sab);
            set_tri(t1, a, p, c, -1, nca, t, sbc, sca, false);
            relink(nca, t, t1);
            legalize_stack_.insert(legalize_stack_.end(), {t, t1});
        } else {
            const Tri U = tris_[u];
            const int su = U.slot(b) >= 0 ? (3 - U.slot(b) - U.slot(c)) : -1;
            const int d = U.v[su];
            // U = (d, c, b) up to rotation.
            const int ub = U.nb[U.slot(c)]; // edge (b, d)
            const int uc = U.nb[U.slot(b)]; // edge (d, c)
            const bool sbd = U.seg[U.slot(c)];
            const bool sdc = U.seg[U.slot(b)];
            const int u1 = new_tri();
            set_tri(t, a, b, p, u1, t1, nab, sbc, false, sab);
            set_tri(t1, a, p, c, u, nca, t, sbc, sca, false);
            set_tri(u, d, c, p, t1, u1, uc, sbc, false, sdc);
            set_tri(u1, d, p, b, t, ub, u, sbc, sbd, false);
            relink(nca, t, t1);
            relink(ub, u, u1);
            legalize_stack_.insert(legalize_stack_.end(), {t, t1, u, u1});
        }
        vtri_[p] = t;
    }

    // Flips the edge opposite slot s of t. Returns the two resulting triangles.
    std::pair<int, int> flip(int t, int s) {
        const Tri T = tris_[t];
        const int u = T.nb[s];
        const Tri U = tris_[u];
        const int a = T.v[s];
        const int b = T.v[(s + 1) % 3];
        const int c = T.v[(s + 2) % 3];
        const int du = 3 - U.slot(b) - U.slot(c);
        const int d = U.v[du];
        const int n_ca = T.nb[(s + 1) % 3];
        const int n_ab = T.nb[(s + 2) % 3];
        const bool s_ca = T.seg[(s + 1) % 3];
        const bool s_ab = T.seg[(s + 2) % 3];
        const int n_bd = U.nb[U.slot(c)];
        const int n_dc = U.nb[U.slot(b)];
        const bool s_bd = U.seg[U.slot(c)];
        const bool s_dc = U.seg[U.slot(b)];
        set_tri(t, a, b, d, n_bd, u, n_ab, s_bd, false, s_ab);
        set_tri(u, a, d, c, n_dc, n_ca, t, s_dc, s_ca, false);
        relink(n_bd, u, t);
        relink(n_ca, t, u);
        return {t, u};
    }

    // Restores the constrained Delaunay property around the newly inserted vertex p.
    void legalize(int p) {
        std::vector<int> stack;
        stack.swap(legalize_stack_);
        while (!stack.empty()) {
            const int t = stack.back();
            stack.pop_back();
            const int s = tris_[t].slot(p);
            if (s < 0) continue;
            const Tri& T = tris_[t];
            const int u = T.nb[s];
            if (u < 0 || T.seg[s]) continue;
            const Tri& U = tris_[u];
            const int b = T.v[(s + 1) % 3];
            const int c = T.v[(s + 2) % 3];
            const int d = U.v[3 - U.slot(b) - U.slot(c)];
            if (incircle(pts_[T.v[0]], pts_[T.v[1]], pts_[T.v[2]], pts_[d]) > 0) {
                auto [t1, t2] = flip(t, s);
                stack.push_back(t1);
                stack.push_back(t2);
            }
        }
        vtri_[p] = -1;
        for (int t : touched_) {
            if (tris_[t].slot(p) >= 0) vtri_[p] = t;
        }
    }

    // Inserts p at a located position. Returns the vertex index or -1 when the
    // point duplicates an existing vertex.
    int insert_at(const Location& loc, const IPt& p, VInfo info) {
        if (loc.where == Where::OnVertex) return -1;
        const int v = add_vertex(p, info);
        if (loc.where == Where::Inside) {
            split_triangle(loc.tri, v);
        } else {
            split_edge(loc.tri, loc.slot, v);
        }
        legalize(v);
        return v;
    }

    // -- conforming Delaunay of the polygon ---------------------------------
    void build_conforming() {
        const std::size_t n = poly_.size();
        const int s0 = add_vertex({-kSuper, -kSuper / 4}, {VKind::Super, 0});
        const int s1 = add_vertex({kSuper, -kSuper / 4}, {VKind::Super, 1});
        const int s2 = add_vertex({0, kSuper}, {VKind::Super, 2});
        const int t0 = new_tri();
        set_tri(t0, s0, s1, s2, -1, -1, -1, false, false, false);

        input_.resize(n);
        int last = t0;
        for (std::size_t i = 0; i < n; ++i) {
            const IPt p = to_lattice(poly_[i]);
            touched_.clear();
            const Location loc = locate(p, last);
            if (loc.where == Where::Blocked) throw MeshFailure("input vertex outside the bounding triangle");
            const int v = insert_at(loc, p, {VKind::Input, i});
            if (v < 0) {
                throw MeshFailure("polyline vertex " + std::to_string(i) +
                                  " coincides with another vertex at mesh resolution");
            }
            input_[i] = v;
            last = vtri_[v];
        }

        struct Pending {
            int a, b;
            std::size_t parent;
        };
        std::vector<Pending> pending;
        for (std::size_t i = n; i-- > 0;) pending.push_back({input_[i], input_[(i + 1) % n], i});
        while (!pending.empty()) {
            const Pending sg = pending.back();
            pending.pop_back();
            if (mark_segment(sg.a, sg.b, sg.parent)) continue;
            const IPt& pa = pts_[sg.a];
            const IPt& pb = pts_[sg.b];
            if (dist2(pa, pb) < 16.0) throw MeshFailure("boundary segment cannot be recovered");
            const IPt m{(pa.x + pb.x) / 2, (pa.y + pb.y) / 2};
            touched_.clear();
            const Location loc = locate(m, vtri_[sg.a]);
            if (loc.where == Where::Blocked) throw MeshFailure("segment midpoint could not be located");
            const int v = insert_at(loc, m, {VKind::Segment, sg.parent});
            if (v < 0) throw MeshFailure("segment midpoint coincides with a vertex");
            pending.push_back({v, sg.b, sg.parent});
            pending.push_back({sg.a, v, sg.parent});
        }
    }

    bool mark_segment(int a, int b, std::size_t parent) {
        for (int t : triangles_around(a)) {
            const int s = edge_slot(t, a, b);
            if (s < 0) continue;
            tris_[t].seg[s] = true;
            const int u = tris_[t].nb[s];
            if (u >= 0) tris_[u].seg[edge_slot(u, a, b)] = true;
            segments_[edge_key(a, b)] = parent;
            return true;
        }
        return false;
    }

    void remove_exterior() {
        std::vector<int> stack;
        for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
            for (int v : tris_[t].v) {
                if (info_[v].kind == VKind::Super) {
                    stack.push_back(t);
                    break;
                }
            }
        }
        std::vector<char> outside(tris_.size(), 0);
        while (!stack.empty()) {
            const int t = stack.back();
            stack.pop_back();
            if (outside[t]) continue;
            outside[t] = 1;
            for (int i = 0; i < 3; ++i) {
                const int u = tris_[t].nb[i];
                if (u >= 0 && !tris_[t].seg[i] && !outside[u]) stack.push_back(u);
            }
        }
        for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
            if (outside[t]) {
                tris_[t].alive = false;
                continue;
            }
            for (int i = 0; i < 3; ++i) {
                const int u = tris_[t].nb[i];
                if (u >= 0 && outside[u]) tris_[t].nb[i] = -1;
            }
            for (int v : tris_[t].v) {
                if (info_[v].kind == VKind::Super) throw MeshFailure("interior triangle touches the bounding triangle");
                vtri_[v] = t;
            }
        }
        // Sharp input corners (< 60 degrees) are exempt from the angle criterion.
        const std::size_t n = poly_.size();
        sharp_.assign(pts_.size(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 u = poly_.vertex(i + n - 1) - poly_[i];
            const Vec2 w = poly_.vertex(i + 1) - poly_[i];
            const double ang = std::atan2(u.x() * w.y() - u.y() * w.x(), u.dot(w));
            const double interior = ang < 0 ? ang + 2.0 * std::numbers::pi : ang;
            if (2.0 * std::numbers::pi - interior < std::numbers::pi / 3.0) sharp_[input_[i]] = 1;
        }
    }

    // -- refinement -------------------------------------------------------
    // Boundary triangle and slot holding the subsegment (a, b).
    std::pair<int, int> find_boundary_edge(int a, int b) const {
        for (int t : triangles_around(a)) {
            const int s = edge_slot(t, a, b);
            if (s >= 0 && tris_[t].nb[s] < 0) return {t, s};
        }
        return {-1, -1};
    }

    bool segment_needs_split(int a, int b) const {
        auto [t, s] = find_boundary_edge(a, b);
        if (t < 0) return false;
        if (dist2(pts_[a], pts_[b]) > h2_) return true;
        return encroaches(pts_[a], pts_[b], pts_[tris_[t].v[s]]);
    }

    bool split_segment(int a, int b) {
        auto [t, s] = find_boundary_edge(a, b);
        if (t < 0) return false;
        const IPt& pa = pts_[a];
        const IPt& pb = pts_[b];
        if (dist2(pa, pb) < 16.0) return false;
        const int apex = tris_[t].v[s];
        // The boundary edge runs v[s+1] -> v[s+2]; interior lies to its left.
        const int from = tris_[t].v[(s + 1) % 3];
        const int to = tris_[t].v[(s + 2) % 3];
        const IPt& pf = pts_[from];
        const IPt& pt = pts_[to];
        const double mx = 0.5 * (static_cast<double>(pf.x) + static_cast<double>(pt.x));
        const double my = 0.5 * (static_cast<double>(pf.y) + static_cast<double>(pt.y));
        IPt best{};
        bool found = false;
        double best_d = 0.0;
        for (double fx : {std::floor(mx), std::ceil(mx)}) {
            for (double fy : {std::floor(my), std::ceil(my)}) {
                const IPt m{static_cast<i64>(fx), static_cast<i64>(fy)};
                if (orient(pf, pt, m) < 0) continue;
                if (orient(pts_[apex], pf, m) <= 0 || orient(pts_[apex], m, pt) <= 0) continue;
                const double d = (fx - mx) * (fx - mx) + (fy - my) * (fy - my);
                if (!found || d < best_d) {
                    best = m;
                    best_d = d;
                    found = true;
                }
            }
        }
        if (!found) return false;
        const std::size_t parent = segments_.at(edge_key(a, b));
        touched_.clear();
        const int v = add_vertex(best, {VKind::Segment, parent});
        sharp_.push_back(0);
        segments_.erase(edge_key(a, b));
        segments_[edge_key(from, v)] = parent;
        segments_[edge_key(v, to)] = parent;
        split_edge(t, s, v);
        legalize(v);
        after_insert();
        return true;
    }

    void after_insert() {
        for (int t : touched_) {
            if (!tris_[t].alive) continue;
            tri_queue_.push_back(t);
            for (int i = 0; i < 3; ++i) {
                if (tris_[t].nb[i] < 0) {
                    seg_queue_.emplace_back(tris_[t].v[(i + 1) % 3], tris_[t].v[(i + 2) % 3]);
                }
            }
        }
        touched_.clear();
    }

    bool is_bad(int t) const {
        const Tri& T = tris_[t];
        double min_ang = std::numbers::pi;
        int min_vertex = -1;
        for (int i = 0; i < 3; ++i) {
            const IPt& o = pts_[T.v[i]];
            const IPt& p = pts_[T.v[(i + 1) % 3]];
            const IPt& q = pts_[T.v[(i + 2) % 3]];
            if (dist2(p, q) > h2_) return true;
            const double ux = static_cast<double>(p.x - o.x), uy = static_cast<double>(p.y - o.y);
            const double vx = static_cast<double>(q.x - o.x), vy = static_cast<double>(q.y - o.y);
            const double ang = std::atan2(std::abs(ux * vy - uy * vx), ux * vx + uy * vy);
            if (ang < min_ang) {
                min_ang = ang;
                min_vertex = T.v[i];
            }
        }
        if (min_ang >= min_angle_) return false;
        return !sharp_[min_vertex];
    }

    bool circumcenter(int t, IPt& out) const {
        const Tri& T = tris_[t];
        const IPt& a = pts_[T.v[0]];
        const double bx = static_cast<double>(pts_[T.v[1]].x - a.x);
        const double by = static_cast<double>(pts_[T.v[1]].y - a.y);
        const double cx = static_cast<double>(pts_[T.v[2]].x - a.x);
        const double cy = static_cast<double>(pts_[T.v[2]].y - a.y);
        const double d = 2.0 * (bx * cy - by * cx);
        if (d == 0.0) return false;
        const double b2 = bx * bx + by * by;
        const double c2 = cx * cx + cy * cy;
        const double ux = (cy * b2 - by * c2) / d;
        const double uy = (bx * c2 - cx * b2) / d;
        const double X = static_cast<double>(a.x) + ux;
        const double Y = static_cast<double>(a.y) + uy;
        if (std::abs(X) > static_cast<double>(kSuper) || std::abs(Y) > static_cast<double>(kSuper)) return false;
        out = {static_cast<i64>(std::llround(X)), static_cast<i64>(std::llround(Y))};
        return true;
    }

    std::array<int, 3> sorted_vertices(int t) const {
        std::array<int, 3> v = tris_[t].v;
        std::sort(v.begin(), v.end());
        return v;
    }

    void refine() {
        for (const auto& [key, parent] : segments_) {
            seg_queue_.emplace_back(static_cast<int>(key >> 32), static_cast<int>(key & 0xffffffffu));
        }
        for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
            if (tris_[t].alive) tri_queue_.push_back(t);
        }
        std::set<std::array<int, 3>> hopeless;

        while (true) {
            if (!seg_queue_.empty()) {
                auto [a, b] = seg_queue_.front();
                seg_queue_.pop_front();
                if (!segments_.count(edge_key(a, b))) continue;
                if (segment_needs_split(a, b)) split_segment(a, b);
                continue;
            }
            if (tri_queue_.empty()) break;
            const int t = tri_queue_.front();
            tri_queue_.pop_front();
            if (!tris_[t].alive || !is_bad(t)) continue;
            const auto key = sorted_vertices(t);
            if (hopeless.count(key)) continue;

            IPt c;
            if (!circumcenter(t, c)) {
                hopeless.insert(key);
                continue;
            }
            std::vector<std::pair<int, int>> hit;
            for (const auto& [k, parent] : segments_) {
                const int a = static_cast<int>(k >> 32);
                const int b = static_cast<int>(k & 0xffffffffu);
                if (encroaches(pts_[a], pts_[b], c)) hit.emplace_back(a, b);
            }
            if (!hit.empty()) {
                bool progressed = false;
                for (auto [a, b] : hit) progressed |= split_segment(a, b);
                if (progressed) {
                    tri_queue_.push_back(t);
                } else {
                    hopeless.insert(key);
                }
                continue;
            }
            touched_.clear();
            Location loc = locate(c, t);
            if (loc.where == Where::Blocked) loc = locate_brute_force(c);
            if (loc.where == Where::Blocked || loc.where == Where::OnVertex ||
                (loc.where == Where::OnEdge && tris_[loc.tri].nb[loc.slot] < 0)) {
                hopeless.insert(key);
                continue;
            }
            insert_at(loc, c, {VKind::Interior, 0});
            sharp_.push_back(0);
            after_insert();
        }
    }

    // -- output -------------------------------------------------------------
    TriangleMesh extract() const {
        TriangleMesh mesh;
        std::vector<int> remap(pts_.size(), -1);
        for (const Tri& T : tris_) {
            if (!T.alive) continue;
            for (int v : T.v) {
                if (remap[v] < 0) {
                    remap[v] = static_cast<int>(mesh.vertices.size());
                    mesh.vertices.push_back(position(v));
                }
            }
            mesh.triangles.push_back({remap[T.v[0]], remap[T.v[1]], remap[T.v[2]]});
        }
        for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
            if (!(mesh.triangle_area(t) > 0.0)) throw MeshFailure("inverted triangle after boundary projection");
        }

        std::unordered_map<int, int> succ;
        for (const Tri& T : tris_) {
            if (!T.alive) continue;
            for (int i = 0; i < 3; ++i) {
                if (T.nb[i] < 0) succ[T.v[(i + 1) % 3]] = T.v[(i + 2) % 3];
            }
        }
        const int start = input_[0];
        int v = start;
        do {
            const auto it = succ.find(v);
            if (it == succ.end()) throw MeshFailure("boundary loop is not closed");
            mesh.boundary_edges.push_back({remap[v], remap[it->second]});
            mesh.boundary_locations.push_back(location(v));
            v = it->second;
            if (mesh.boundary_edges.size() > succ.size()) throw MeshFailure("boundary loop does not close");
        } while (v != start);
        if (mesh.boundary_edges.size() != succ.size()) throw MeshFailure("domain boundary has several loops");

        mesh.boundary_vertex_map.resize(input_.size());
        for (std::size_t i = 0; i < input_.size(); ++i) mesh.boundary_vertex_map[i] = remap[input_[i]];
        return mesh;
    }

    BoundaryLocation location(int v) const {
        const VInfo& in = info_[v];
        if (in.kind == VKind::Input) return {in.index, 0.0};
        const std::size_t j = in.index;
        const Vec2& q0 = poly_[j];
        const Vec2 e = poly_.vertex(j + 1) - q0;
        const double t = (from_lattice(pts_[v]) - q0).dot(e) / e.squaredNorm();
        return {j, std::clamp(t, 1e-12, 1.0 - 1e-12)};
    }

    Vec2 position(int v) const {
        const VInfo& in = info_[v];
        switch (in.kind) {
        case VKind::Input:
            return poly_[in.index];
        case VKind::Segment: {
            const BoundaryLocation loc = location(v);
            return poly_[loc.segment] + loc.t * (poly_.vertex(loc.segment + 1) - poly_[loc.segment]);
        }
        default:
            return from_lattice(pts_[v]);
        }
    }

    const BoundaryPolyline& poly_;
    MeshOptions opts_;
    Vec2 center_;
    double scale_ = 1.0;
    double h2_ = 0.0;
    double min_angle_ = 0.0;
    std::uint64_t rng_ = 0x9e3779b97f4a7c15ULL;

    std::vector<IPt> pts_;
    std::vector<VInfo> info_;
    std::vector<int> vtri_;
    std::vector<Tri> tris_;
    std::vector<int> input_;
    std::vector<char> sharp_;
    std::map<std::uint64_t, std::size_t> segments_;
    std::vector<int> touched_;
    std::vector<int> legalize_stack_;
    std::deque<std::pair<int, int>> seg_queue_;
    std::deque<int> tri_queue_;
};

} // namespace

TriangleMesh triangulate(const BoundaryPolyline& b, const MeshOptions& opts) {
    if (!(opts.target_h > 0.0)) throw MeshFailure("target edge length must be positive");
    check_simple(b);
    if (b.signed_area() <= 0.0) throw MeshFailure("polyline must be counterclockwise");
    Refiner r(b, opts);
    return r.run();
}

TriangleMesh triangulate(const BoundaryPolyline& b, double target_h) {
    MeshOptions opts;
    opts.target_h = target_h;
    return triangulate(b, opts);
}

// ---------------------------------------------------------------------------
// Harmonic mesh motion

TriangleMesh deform_to(const TriangleMesh& mesh, const BoundaryPolyline& target) {
    const std::size_t nv = mesh.vertex_count();
    std::vector<int> bindex(nv, -1);
    std::vector<Vec2> bpos;
    for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
        const int v = mesh.boundary_edges[k][0];
        const BoundaryLocation& loc = mesh.boundary_locations[k];
        const Vec2& q0 = target.vertex(loc.segment);
        const Vec2& q1 = target.vertex(loc.segment + 1);
        bindex[v] = static_cast<int>(bpos.size());
        bpos.push_back(q0 + loc.t * (q1 - q0));
    }
    std::vector<int> iindex(nv, -1);
    int ni = 0;
    for (std::size_t v = 0; v < nv; ++v) {
        if (bindex[v] < 0) iindex[v] = ni++;
    }

    TriangleMesh out = mesh;
    for (std::size_t v = 0; v < nv; ++v) {
        if (bindex[v] >= 0) out.vertices[v] = bpos[static_cast<std::size_t>(bindex[v])];
    }
    if (ni == 0) return out;

    // P1 Laplacian on the reference mesh; displacement is harmonic inside.
    std::vector<Eigen::Triplet<double>> kii;
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(ni, 2);
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles[t];
        const double area = mesh.triangle_area(t);
        std::array<Vec2, 3> g;
        for (int i = 0; i < 3; ++i) {
            const Vec2 e = mesh.vertices[tri[(i + 2) % 3]] - mesh.vertices[tri[(i + 1) % 3]];
            g[i] = Vec2(-e.y(), e.x()) / (2.0 * area);
        }
        for (int i = 0; i < 3; ++i) {
            const int ri = iindex[tri[i]];
            if (ri < 0) continue;
            for (int j = 0; j < 3; ++j) {
                const double kij = area * g[i].dot(g[j]);
                const int rj = iindex[tri[j]];
                if (rj >= 0) {
                    kii.emplace_back(ri, rj, kij);
                } else {
                    const Vec2 disp = out.vertices[tri[j]] - mesh.vertices[tri[j]];
                    rhs(ri, 0) -= kij * disp.x();
                    rhs(ri, 1) -= kij * disp.y();
                }
            }
        }
    }
    Eigen::SparseMatrix<double> K(ni, ni);
    K.setFromTriplets(kii.begin(), kii.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(K);
    if (solver.info() != Eigen::Success) throw MeshFailure("harmonic extension failed to factor");
    const Eigen::MatrixXd disp = solver.solve(rhs);
    for (std::size_t v = 0; v < nv; ++v) {
        if (iindex[v] >= 0) {
            out.vertices[v] += Vec2(disp(iindex[v], 0), disp(iindex[v], 1));
        }
    }
    for (std::size_t t = 0; t < out.triangle_count(); ++t) {
        if (!(out.triangle_area(t) > 0.0)) throw MeshFailure("mesh motion inverted a triangle");
    }
    return out;
}

} // namespace steklov
