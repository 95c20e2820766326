#pragma once

#include "steklov/geometry.hpp"

namespace steklov {

/// Exact sign of the orientation determinant of (a, b, c): +1 for a
/// counterclockwise turn, -1 for clockwise, 0 for collinear. A floating-point
/// filter is tried first; near-degenerate inputs fall back to exact expansion
/// arithmetic.
int orient2d(const Vec2& a, const Vec2& b, const Vec2& c);

/// Closed-segment intersection test (touching and collinear overlap count).
bool segments_intersect(const Vec2& p0, const Vec2& p1, const Vec2& q0, const Vec2& q1);

} // namespace steklov
