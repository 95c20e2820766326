#include "steklov/geometry.hpp"

#include "steklov/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace steklov {

AngleGrid::AngleGrid(std::size_t n_angles) : n_(n_angles), h_(0.0) {
    if (n_angles < 8 || n_angles % 2 != 0) {
        throw Error("geometry", "angle count must be even and >= 8, got " + std::to_string(n_angles));
    }
    h_ = 2.0 * std::numbers::pi / static_cast<double>(n_angles);
}

SupportVector::SupportVector(AngleGrid g, Eigen::VectorXd values) : grid(g), p(std::move(values)) {
    if (static_cast<std::size_t>(p.size()) != grid.size()) {
        throw Error("geometry", "support vector length does not match the angle grid");
    }
}

SupportVector SupportVector::constant(std::size_t n_angles, double radius) {
    return SupportVector(AngleGrid(n_angles),
                         Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n_angles), radius));
}

double BoundaryPolyline::signed_area() const {
    double a = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        const Vec2& p = vertices[i];
        const Vec2& q = vertices[next(i)];
        a += p.x() * q.y() - p.y() * q.x();
    }
    return 0.5 * a;
}

double BoundaryPolyline::perimeter() const {
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) s += (vertices[next(i)] - vertices[i]).norm();
    return s;
}

bool BoundaryPolyline::is_convex() const {
    const std::size_t n = size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 e0 = vertices[i] - vertices[prev(i)];
        const Vec2 e1 = vertices[next(i)] - vertices[i];
        const double cross = e0.x() * e1.y() - e0.y() * e1.x();
        if (cross < -1e-14 * e0.norm() * e1.norm()) return false;
    }
    return true;
}

BoundaryPolyline BoundaryPolyline::scaled(double t) const {
    BoundaryPolyline out;
    out.vertices.reserve(size());
    for (const Vec2& v : vertices) out.vertices.push_back(t * v);
    return out;
}

BoundaryPolyline reconstruct_boundary(const SupportVector& sv) {
    const AngleGrid& g = sv.grid;
    const std::size_t n = g.size();
    const double h = g.step();
    BoundaryPolyline b;
    b.vertices.reserve(n);
    double pmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double th = g.theta(i);
        const double pi = sv[i];
        const double dp = (sv[g.next(i)] - sv[g.prev(i)]) / (2.0 * h);
        const double c = std::cos(th);
        const double s = std::sin(th);
        b.vertices.emplace_back(pi * c - dp * s, pi * s + dp * c);
        pmax = std::max(pmax, std::abs(pi));
    }
    const double tol = 1e-12 * std::max(pmax, 1e-300);
    for (std::size_t i = 0; i < n; ++i) {
        if ((b.vertices[b.next(i)] - b.vertices[i]).norm() <= tol) {
            throw DegenerateBoundary("reconstructed vertices " + std::to_string(i) + " and " +
                                     std::to_string(b.next(i)) + " coincide");
        }
    }
    return b;
}

Eigen::VectorXd convexity_residuals(const SupportVector& sv) {
    const AngleGrid& g = sv.grid;
    const std::size_t n = g.size();
    const double inv_h2 = 1.0 / (g.step() * g.step());
    Eigen::VectorXd r(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        r[static_cast<Eigen::Index>(i)] =
            sv[i] + (sv[g.next(i)] + sv[g.prev(i)] - 2.0 * sv[i]) * inv_h2;
    }
    return r;
}

Eigen::VectorXd width_values(const SupportVector& sv) {
    const std::size_t half = sv.size() / 2;
    Eigen::VectorXd w(static_cast<Eigen::Index>(half + 1));
    for (std::size_t i = 0; i < half; ++i) w[static_cast<Eigen::Index>(i)] = sv[i] + sv[i + half];
    w[static_cast<Eigen::Index>(half)] = sv[0] + sv[half];
    return w;
}

Eigen::VectorXd diameter_slacks(const SupportVector& sv, double d) {
    Eigen::VectorXd w = width_values(sv);
    const Eigen::Index half = w.size() - 1;
    Eigen::VectorXd s(w.size());
    s.head(half) = Eigen::VectorXd::Constant(half, d) - w.head(half);
    s[half] = w[half] - d;
    return s;
}

namespace {

void collect_pairs(const BoundaryPolyline& b, double diameter, double pair_tol,
                   const std::vector<std::pair<std::size_t, std::size_t>>& candidates,
                   DiameterReport& rep) {
    const double threshold = diameter * (1.0 - pair_tol);
    for (auto [i, j] : candidates) {
        if (i == j) continue;
        auto key = std::minmax(i, j);
        if ((b[i] - b[j]).norm() >= threshold) rep.pairs.emplace_back(key.first, key.second);
    }
    std::sort(rep.pairs.begin(), rep.pairs.end());
    rep.pairs.erase(std::unique(rep.pairs.begin(), rep.pairs.end()), rep.pairs.end());
}

void require_two_distinct(const BoundaryPolyline& b) {
    if (b.size() < 2) throw DegenerateBoundary("fewer than two vertices");
    for (std::size_t i = 1; i < b.size(); ++i) {
        if (b[i] != b[0]) return;
    }
    throw DegenerateBoundary("all vertices coincide");
}

} // namespace

DiameterReport compute_diameter_brute_force(const BoundaryPolyline& b, double pair_tol) {
    require_two_distinct(b);
    const std::size_t n = b.size();
    double best2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) best2 = std::max(best2, (b[i] - b[j]).squaredNorm());
    }
    DiameterReport rep;
    rep.diameter = std::sqrt(best2);
    const double threshold = rep.diameter * (1.0 - pair_tol);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if ((b[i] - b[j]).norm() >= threshold) rep.pairs.emplace_back(i, j);
        }
    }
    return rep;
}

DiameterReport compute_diameter(const BoundaryPolyline& b, double pair_tol) {
    require_two_distinct(b);
    const std::size_t n = b.size();
    if (n < 4 || !b.is_convex()) return compute_diameter_brute_force(b, pair_tol);

    // Rotating calipers: for each edge (i, i+1) advance the antipodal vertex j
    // while the triangle area keeps growing.
    auto area2 = [&](std::size_t i, std::size_t j, std::size_t k) {
        const Vec2 u = b[j] - b[i];
        const Vec2 v = b[k] - b[i];
        return std::abs(u.x() * v.y() - u.y() * v.x());
    };
    std::vector<std::pair<std::size_t, std::size_t>> candidates;
    candidates.reserve(4 * n);
    std::size_t j = 1;
    std::size_t advanced = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t i1 = b.next(i);
        if (j == i || j == i1) j = b.next(i1);
        while (area2(i, i1, b.next(j)) > area2(i, i1, j) && advanced < 3 * n) {
            j = b.next(j);
            ++advanced;
        }
        candidates.emplace_back(i, j);
        candidates.emplace_back(i1, j);
        candidates.emplace_back(i, b.next(j));
        candidates.emplace_back(i1, b.next(j));
    }
    double best2 = 0.0;
    for (auto [p, q] : candidates) best2 = std::max(best2, (b[p] - b[q]).squaredNorm());
    DiameterReport rep;
    rep.diameter = std::sqrt(best2);
    collect_pairs(b, rep.diameter, pair_tol, candidates, rep);
    return rep;
}

double diameter_directional_derivative(const BoundaryPolyline& b, const DiameterReport& rep,
                                       std::span<const Vec2> field) {
    if (rep.pairs.empty()) throw EmptyDiameterSet();
    if (field.size() != b.size()) {
        throw Error("geometry", "displacement field length does not match the polyline");
    }
    double best = -std::numeric_limits<double>::infinity();
    for (auto [i, j] : rep.pairs) {
        best = std::max(best, (b[i] - b[j]).dot(field[i] - field[j]));
    }
    return best / rep.diameter;
}

Vec2 edge_normal(const BoundaryPolyline& b, std::size_t i) {
    const Vec2 e = b.vertex(i + 1) - b.vertex(i);
    return Vec2(e.y(), -e.x()).normalized();
}

} // namespace steklov
