#include "steklov/predicates.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace steklov {

namespace {

// Error-free transformations (Knuth two-sum, fma two-product).
inline void two_sum(double a, double b, double& s, double& e) {
    s = a + b;
    const double bv = s - a;
    const double av = s - bv;
    e = (a - av) + (b - bv);
}

inline void two_product(double a, double b, double& p, double& e) {
    p = a * b;
    e = std::fma(a, b, -p);
}

// Adds b to a nonoverlapping expansion, dropping zero components.
void grow_expansion(std::vector<double>& e, double b) {
    std::vector<double> out;
    out.reserve(e.size() + 1);
    double q = b;
    for (double ei : e) {
        double s, err;
        two_sum(q, ei, s, err);
        if (err != 0.0) out.push_back(err);
        q = s;
    }
    if (q != 0.0 || out.empty()) out.push_back(q);
    e.swap(out);
}

int exact_orient(const Vec2& a, const Vec2& b, const Vec2& c) {
    // ax*by - ax*cy - cx*by - ay*bx + ay*cx + cy*bx
    const std::array<std::array<double, 3>, 6> terms{{
        {a.x(), b.y(), 1.0},
        {a.x(), c.y(), -1.0},
        {c.x(), b.y(), -1.0},
        {a.y(), b.x(), -1.0},
        {a.y(), c.x(), 1.0},
        {c.y(), b.x(), 1.0},
    }};
    std::vector<double> expansion;
    for (const auto& t : terms) {
        double p, e;
        two_product(t[0], t[1], p, e);
        grow_expansion(expansion, t[2] * e);
        grow_expansion(expansion, t[2] * p);
    }
    for (auto it = expansion.rbegin(); it != expansion.rend(); ++it) {
        if (*it > 0.0) return 1;
        if (*it < 0.0) return -1;
    }
    return 0;
}

} // namespace

int orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
    const double detleft = (a.x() - c.x()) * (b.y() - c.y());
    const double detright = (a.y() - c.y()) * (b.x() - c.x());
    const double det = detleft - detright;
    const double bound = (3.0 + 16.0 * std::numeric_limits<double>::epsilon()) *
                         std::numeric_limits<double>::epsilon() *
                         (std::abs(detleft) + std::abs(detright));
    if (det > bound) return 1;
    if (-det > bound) return -1;
    return exact_orient(a, b, c);
}

bool segments_intersect(const Vec2& p0, const Vec2& p1, const Vec2& q0, const Vec2& q1) {
    const int o1 = orient2d(p0, p1, q0);
    const int o2 = orient2d(p0, p1, q1);
    const int o3 = orient2d(q0, q1, p0);
    const int o4 = orient2d(q0, q1, p1);
    if (o1 * o2 < 0 && o3 * o4 < 0) return true;
    auto on_segment = [](const Vec2& a, const Vec2& b, const Vec2& p) {
        return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
               std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
    };
    if (o1 == 0 && on_segment(p0, p1, q0)) return true;
    if (o2 == 0 && on_segment(p0, p1, q1)) return true;
    if (o3 == 0 && on_segment(q0, q1, p0)) return true;
    if (o4 == 0 && on_segment(q0, q1, p1)) return true;
    return false;
}

} // namespace steklov
