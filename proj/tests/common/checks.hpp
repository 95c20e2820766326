#pragma once

// Checks shared by the unit tests and the acceptance runner. Each returns a
// verdict and a one-line summary of the measured values.

#include "steklov/geometry.hpp"

#include <cstddef>
#include <cstdint>
#include <string>

namespace steklov::checks {

struct CheckResult {
    bool passed = false;
    std::string detail;
};

/// Support function of the ellipse with semi-axes a (x) and b (y).
SupportVector ellipse_support(std::size_t n_angles, double a, double b);
/// Axis-aligned rectangle centred at the origin with `per_side` vertices per edge.
BoundaryPolyline rectangle(double width, double height, std::size_t per_side);

/// First 8 nonzero eigenvalues of the disk of radius 1 against 1,1,2,2,3,3,4,4.
CheckResult disk_spectrum(std::size_t n_angles, double mesh_h, double tol);
/// sigma_k(t Omega) t against sigma_k(Omega) on the scaled mesh, t in {0.5, 2}.
CheckResult homogeneity(double tol);
/// Support-gradient entries at random indices and shape derivatives along
/// random fields against central differences on the ellipse (1, 0.6), k = 1.
CheckResult gradient_vs_fd(std::uint64_t seed, int samples, double tol);
/// Constraint residuals are affine: r(a x + (1-a) y) = a r(x) + (1-a) r(y).
CheckResult constraint_residual_linearity(std::uint64_t seed, int samples);
/// P(P(x)) = P(x) and P(x) is feasible for random x in both modes.
CheckResult projection_idempotence(std::uint64_t seed, int samples);
/// Translation fields leave sigma_k unchanged, V(x) = x gives -sigma_k, for the
/// shape derivative and the support gradient.
CheckResult derivative_identities(double tol);
/// Caliper diameter equals the all-pairs diameter on random convex polygons.
CheckResult calipers_vs_brute_force(std::uint64_t seed, int polygons);

} // namespace steklov::checks
