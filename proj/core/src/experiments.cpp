#include "steklov/experiments.hpp"

#include "steklov/errors.hpp"
#include "steklov/mesh.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace steklov {

double unit_ball_volume(int n) {
    if (n < 0) throw Error("experiments", "negative dimension");
    const double h = 0.5 * static_cast<double>(n);
    return std::pow(std::numbers::pi, h) / std::tgamma(h + 1.0);
}

double wallis_integral(int p) {
    if (p < 0) throw Error("experiments", "negative Wallis index");
    double even = std::numbers::pi;
    double odd = 2.0;
    if (p == 0) return even;
    if (p == 1) return odd;
    double j = (p % 2 == 0) ? even : odd;
    for (int q = (p % 2 == 0) ? 2 : 3; q <= p; q += 2) j *= static_cast<double>(q - 1) / static_cast<double>(q);
    return j;
}

double lateral_perimeter_constant(int d) {
    if (d < 2) throw Error("experiments", "dimension must be at least 2");
    const double e = static_cast<double>(d - 2) / static_cast<double>(d - 1);
    return unit_ball_volume(d - 2) / (static_cast<double>(d - 1) * std::pow(unit_ball_volume(d - 1), e));
}

double bound_constant(int d, std::size_t k) {
    const double base = 2.0 * static_cast<double>(k + 1);
    return std::pow(base, d + 1) / (4.0 * lateral_perimeter_constant(d));
}

double perturbation_constant(int d) {
    if (d < 2) throw Error("experiments", "dimension must be at least 2");
    double prod = 1.0;
    for (int p = 3; p <= d; ++p) prod *= wallis_integral(p);
    return static_cast<double>(d - 1) * std::numbers::pi / (2.0 * unit_ball_volume(d)) * prod;
}

BoundConstant derive_bound_constant(std::size_t k) {
    if (k < 1) throw Error("experiments", "bound constant needs k >= 1");
    return {k, bound_constant(2, k)};
}

BoundCheck check_bound(double sigma_k, double area, double diameter, std::size_t k) {
    BoundCheck c;
    c.sigma = sigma_k;
    c.bound = derive_bound_constant(k).value * area / (diameter * diameter * diameter);
    c.margin = sigma_k / c.bound;
    c.passed = sigma_k <= c.bound;
    return c;
}

BoundCheck check_bound(const BoundaryPolyline& b, const SteklovSpectrum& spec, std::size_t k) {
    if (k >= spec.size()) throw Error("experiments", "spectrum does not reach index k");
    return check_bound(spec.sigma(k), std::abs(b.signed_area()), compute_diameter(b).diameter, k);
}

void PerturbationSpec::validate() const {
    if (epsilons.empty()) throw Error("experiments", "no perturbation amplitudes");
    if (!std::is_sorted(epsilons.begin(), epsilons.end())) throw Error("experiments", "epsilons must be ascending");
    if (epsilons.front() <= 0.0 || epsilons.back() > 0.05) {
        throw Error("experiments", "epsilons must lie in (0, 0.05]");
    }
    if (n_angles < 8 || n_angles % 2 != 0) throw Error("experiments", "angle count must be even and >= 8");
    if (!(radius > 0.0) || !(mesh_factor > 0.0)) throw Error("experiments", "radius and mesh factor must be positive");
}

double predicted_disk_slope(double a2, double a4) {
    const double K = perturbation_constant(2);
    return 2.0 * (a4 - (K - 1.0) * a2);
}

BoundaryPolyline perturbed_disk(const PerturbationSpec& spec, double eps) {
    const AngleGrid grid(spec.n_angles);
    BoundaryPolyline b;
    b.vertices.reserve(spec.n_angles);
    for (std::size_t i = 0; i < spec.n_angles; ++i) {
        const double t = grid.theta(i);
        const double r = spec.radius * (1.0 + eps * (spec.a2 * std::cos(2.0 * t) + spec.a4 * std::cos(4.0 * t)));
        b.vertices.emplace_back(r * std::cos(t), r * std::sin(t));
    }
    return b;
}

SlopeReport disk_perturbation_slope(const PerturbationSpec& spec) {
    spec.validate();
    SlopeReport rep;
    rep.predicted = predicted_disk_slope(spec.a2, spec.a4);
    const double h = spec.mesh_factor * 2.0 * spec.radius;

    std::vector<double> eps{0.0};
    eps.insert(eps.end(), spec.epsilons.begin(), spec.epsilons.end());
    for (double e : eps) {
        const BoundaryPolyline b = perturbed_disk(spec, e);
        const TriangleMesh mesh = triangulate(b, h);
        const SteklovSpectrum s = steklov_spectrum(mesh, 2, spec.element_order);
        rep.samples.emplace_back(e, s.sigma(1) * compute_diameter(b).diameter);
    }

    // Least squares in 1, eps, eps^2 (straight line with only two samples);
    // the quadratic term absorbs most of the curvature at these amplitudes.
    const auto n = static_cast<Eigen::Index>(rep.samples.size());
    const Eigen::Index cols = n >= 4 ? 3 : 2;
    Eigen::MatrixXd A(n, cols);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double e = rep.samples[static_cast<std::size_t>(i)].first;
        A(i, 0) = 1.0;
        A(i, 1) = e;
        if (cols == 3) A(i, 2) = e * e;
        y[i] = rep.samples[static_cast<std::size_t>(i)].second;
    }
    const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(y);
    rep.measured = coef[1];
    rep.relative_error = rep.predicted != 0.0 ? std::abs(rep.measured - rep.predicted) / std::abs(rep.predicted)
                                              : std::numeric_limits<double>::infinity();
    return rep;
}

MultiplicityReport multiplicity_report(const SteklovSpectrum& spec, std::size_t k) {
    if (k < 1 || k + 1 >= spec.size()) throw Error("experiments", "spectrum must contain sigma_{k-1}..sigma_{k+1}");
    MultiplicityReport r;
    r.k = k;
    r.sigma = spec.sigma(k);
    r.upper_gap = (spec.sigma(k + 1) - r.sigma) / r.sigma;
    r.lower_gap = (r.sigma - spec.sigma(k - 1)) / r.sigma;
    return r;
}

} // namespace steklov
