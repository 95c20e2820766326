#include "steklov/shape_gradient.hpp"

#include "steklov/errors.hpp"

#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <limits>

namespace steklov {

Eigen::VectorXd polyline_curvature(const BoundaryPolyline& b) {
    const std::size_t n = b.size();
    Eigen::VectorXd H(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 e0 = b[i] - b[b.prev(i)];
        const Vec2 e1 = b[b.next(i)] - b[i];
        const double turn = std::atan2(e0.x() * e1.y() - e0.y() * e1.x(), e0.dot(e1));
        H[static_cast<Eigen::Index>(i)] = turn / (0.5 * (e0.norm() + e1.norm()));
    }
    return H;
}

ShapeSensitivity::ShapeSensitivity(const BoundaryPolyline& b, const TriangleMesh& mesh, const SteklovSpectrum& spec)
    : b_(b), mesh_(mesh), spec_(spec), H_(polyline_curvature(b)) {
    if (mesh.boundary_edges.size() != spec.edge_lengths.size()) {
        throw Error("shape_gradient", "spectrum was not computed on this mesh");
    }
}

void ShapeSensitivity::require_simple(std::size_t k, double tol) const {
    if (k >= spec_.size()) throw Error("shape_gradient", "eigenvalue index out of range");
    const double s = spec_.sigma(k);
    double gap = std::numeric_limits<double>::infinity();
    if (k + 1 < spec_.size()) gap = std::min(gap, (spec_.sigma(k + 1) - s) / s);
    if (k >= 1) gap = std::min(gap, (s - spec_.sigma(k - 1)) / s);
    if (gap < tol) throw ClusteredEigenvalue(static_cast<int>(k), gap);
}

std::vector<Eigen::MatrixXd> ShapeSensitivity::integrate(std::size_t first, std::size_t last,
                                                         const Vec2* direction) const {
    if (last < first || last >= spec_.size()) throw Error("shape_gradient", "invalid cluster range");
    const std::size_t n = b_.size();
    const auto c = static_cast<Eigen::Index>(last - first + 1);
    std::vector<Eigen::MatrixXd> out(n, Eigen::MatrixXd::Zero(c, c));

    // 4-point Gauss-Legendre on [0, 1].
    static constexpr std::array<double, 4> gs = {0.0694318442029737, 0.3300094782075719, 0.6699905217924281,
                                                 0.9305681557970263};
    static constexpr std::array<double, 4> gw = {0.1739274225337269, 0.3260725774662731, 0.3260725774662731,
                                                 0.1739274225337269};

    const auto& locs = mesh_.boundary_locations;
    const std::size_t ne = locs.size();
    Eigen::VectorXd u(c), ut(c), sig(c);
    for (Eigen::Index a = 0; a < c; ++a) sig[a] = spec_.sigma(first + static_cast<std::size_t>(a));
    Eigen::MatrixXd integrand(c, c);

    for (std::size_t k = 0; k < ne; ++k) {
        const std::size_t j = locs[k].segment;
        const std::size_t j1 = b_.next(j);
        const double t0 = locs[k].t;
        const double t1 = locs[(k + 1) % ne].segment == j ? locs[(k + 1) % ne].t : 1.0;
        const double len = spec_.edge_lengths[k];
        double weight = len;
        if (direction != nullptr) weight *= edge_normal(b_, j).dot(*direction);
        if (weight == 0.0) continue;

        for (std::size_t g = 0; g < gs.size(); ++g) {
            const double t = t0 + gs[g] * (t1 - t0);
            const double H = (1.0 - t) * H_[static_cast<Eigen::Index>(j)] + t * H_[static_cast<Eigen::Index>(j1)];
            for (Eigen::Index a = 0; a < c; ++a) {
                spec_.edge_eval(k, first + static_cast<std::size_t>(a), gs[g], u[a], ut[a]);
            }
            for (Eigen::Index a = 0; a < c; ++a) {
                for (Eigen::Index bb = a; bb < c; ++bb) {
                    const double v = ut[a] * ut[bb] - sig[a] * sig[bb] * u[a] * u[bb] -
                                     0.5 * (sig[a] + sig[bb]) * H * u[a] * u[bb];
                    integrand(a, bb) = v;
                    integrand(bb, a) = v;
                }
            }
            const double w = gw[g] * weight;
            out[j] += ((1.0 - t) * w) * integrand;
            out[j1] += (t * w) * integrand;
        }
    }
    return out;
}

std::vector<Eigen::MatrixXd> ShapeSensitivity::hat_matrices(std::size_t first, std::size_t last) const {
    return integrate(first, last, nullptr);
}

std::vector<Eigen::MatrixXd> ShapeSensitivity::hat_matrices(std::size_t first, std::size_t last,
                                                            const Vec2& direction) const {
    return integrate(first, last, &direction);
}

Eigen::MatrixXd ShapeSensitivity::cluster_matrix(std::size_t first, std::size_t last,
                                                 std::span<const double> vn) const {
    if (vn.size() != b_.size()) throw Error("shape_gradient", "velocity length does not match the polyline");
    const auto hats = hat_matrices(first, last);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(hats[0].rows(), hats[0].cols());
    for (std::size_t i = 0; i < hats.size(); ++i) M += vn[i] * hats[i];
    return M;
}

Eigen::MatrixXd ShapeSensitivity::cluster_matrix(std::size_t first, std::size_t last,
                                                 std::span<const Vec2> field) const {
    if (field.size() != b_.size()) throw Error("shape_gradient", "field length does not match the polyline");
    const auto hx = hat_matrices(first, last, Vec2(1.0, 0.0));
    const auto hy = hat_matrices(first, last, Vec2(0.0, 1.0));
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(hx[0].rows(), hx[0].cols());
    for (std::size_t i = 0; i < hx.size(); ++i) M += field[i].x() * hx[i] + field[i].y() * hy[i];
    return M;
}

double ShapeSensitivity::derivative(std::size_t k, std::span<const double> vn, double tol) const {
    require_simple(k, tol);
    return cluster_matrix(k, k, vn)(0, 0);
}

double ShapeSensitivity::derivative(std::size_t k, std::span<const Vec2> field, double tol) const {
    require_simple(k, tol);
    return cluster_matrix(k, k, field)(0, 0);
}

std::size_t cluster_end(const SteklovSpectrum& spec, std::size_t k, double tol) {
    std::size_t last = k;
    while (last + 1 < spec.size() && spec.sigma(last + 1) <= spec.sigma(k) * (1.0 + tol)) ++last;
    return last;
}

Eigen::VectorXd support_gradient(const ShapeSensitivity& s, std::size_t k, double tol) {
    const std::size_t last = cluster_end(s.spectrum(), k, tol);
    const auto hats = s.hat_matrices(k, last);
    Eigen::VectorXd g(static_cast<Eigen::Index>(hats.size()));
    for (std::size_t i = 0; i < hats.size(); ++i) {
        if (hats[i].rows() == 1) {
            g[static_cast<Eigen::Index>(i)] = hats[i](0, 0);
        } else {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hats[i], Eigen::EigenvaluesOnly);
            g[static_cast<Eigen::Index>(i)] = es.eigenvalues()[0];
        }
    }
    return g;
}

} // namespace steklov
