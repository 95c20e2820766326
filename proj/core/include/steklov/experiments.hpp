#pragma once

// Numerical checks around sigma_k under a diameter constraint: the explicit
// upper bound sigma_k <= C(d, k) |Omega|^{1/(d-1)} / D^{(2d-1)/(d-1)}, the
// first-order behaviour of sigma_1 * D near the disk, and eigenvalue
// multiplicity at computed optima.

#include "steklov/fem.hpp"
#include "steklov/geometry.hpp"

#include <cstddef>
#include <vector>

namespace steklov {

/// Volume of the unit ball in R^n (omega_0 = 1, omega_1 = 2, omega_2 = pi).
double unit_ball_volume(int n);
/// Wallis integral j_p = int_0^pi sin^p t dt.
double wallis_integral(int p);
/// C_d = omega_{d-2} / ((d-1) omega_{d-1}^{(d-2)/(d-1)}).
double lateral_perimeter_constant(int d);
/// C(d, k) = [2(k+1)]^{d+1} / (4 C_d).
double bound_constant(int d, std::size_t k);
/// K(d) = ((d-1) pi / (2 omega_d)) prod_{p=3}^{d} j_p.
double perturbation_constant(int d);

struct BoundConstant {
    std::size_t k = 1;
    double value = 0.0; ///< C(2, k) = 2 (k+1)^3
};

BoundConstant derive_bound_constant(std::size_t k);

struct BoundCheck {
    bool passed = false;
    double sigma = 0.0;
    double bound = 0.0;
    /// sigma / bound; below 1 when the bound holds.
    double margin = 0.0;
};

/// sigma_k <= C(2, k) area / D^3 in the plane.
BoundCheck check_bound(double sigma_k, double area, double diameter, std::size_t k);
/// Shoelace area and caliper diameter of b, sigma_k from spec.
BoundCheck check_bound(const BoundaryPolyline& b, const SteklovSpectrum& spec, std::size_t k);

struct PerturbationSpec {
    double a2 = 1.0;
    double a4 = 1.0;
    std::vector<double> epsilons{0.005, 0.01, 0.02};
    std::size_t n_angles = 200;
    double mesh_factor = 0.05;
    double radius = 1.0;
    int element_order = 2;

    void validate() const;
};

struct SlopeReport {
    double measured = 0.0;
    double predicted = 0.0;
    /// (epsilon, D * sigma_1) samples, epsilon = 0 first.
    std::vector<std::pair<double, double>> samples;
    /// |measured - predicted| / |predicted|; infinite when predicted is zero.
    double relative_error = 0.0;
};

/// Predicted first-order slope 2 (a4 - (K - 1) a2) of epsilon -> D sigma_1 with K = K(2).
double predicted_disk_slope(double a2, double a4);

/// Boundary points (1 + eps (a2 cos 2t + a4 cos 4t)) R (cos t, sin t) on the angle grid.
BoundaryPolyline perturbed_disk(const PerturbationSpec& spec, double eps);

/// Least-squares slope at 0 of D * sigma_1 over epsilon = 0 and spec.epsilons
/// (quadratic model when at least three nonzero amplitudes are given).
SlopeReport disk_perturbation_slope(const PerturbationSpec& spec);

struct MultiplicityReport {
    std::size_t k = 1;
    double sigma = 0.0;
    /// (sigma_{k+1} - sigma_k) / sigma_k
    double upper_gap = 0.0;
    /// (sigma_k - sigma_{k-1}) / sigma_k
    double lower_gap = 0.0;
};

MultiplicityReport multiplicity_report(const SteklovSpectrum& spec, std::size_t k);

} // namespace steklov
