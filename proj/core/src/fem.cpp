#include "steklov/fem.hpp"

#include "steklov/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>

namespace steklov {

namespace {

std::uint64_t edge_key(int a, int b) {
    const auto [lo, hi] = std::minmax(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(lo)) << 32) | static_cast<std::uint32_t>(hi);
}

} // namespace

FemSpace::FemSpace(TriangleMesh mesh, int order) : mesh_(std::move(mesh)), order_(order) {
    if (order != 1 && order != 2) throw Error("fem", "element order must be 1 or 2");
    const std::size_t nv = mesh_.vertex_count();
    dof_points_ = mesh_.vertices;
    cell_dofs_.resize(mesh_.triangle_count());
    std::unordered_map<std::uint64_t, int> edge_dof;
    int next = static_cast<int>(nv);
    for (std::size_t t = 0; t < mesh_.triangle_count(); ++t) {
        const auto& tri = mesh_.triangles[t];
        auto& dofs = cell_dofs_[t];
        dofs.fill(-1);
        for (int i = 0; i < 3; ++i) dofs[i] = tri[i];
        if (order_ == 2) {
            for (int i = 0; i < 3; ++i) {
                const int a = tri[(i + 1) % 3];
                const int b = tri[(i + 2) % 3];
                auto [it, inserted] = edge_dof.try_emplace(edge_key(a, b), next);
                if (inserted) {
                    ++next;
                    dof_points_.push_back(0.5 * (mesh_.vertices[a] + mesh_.vertices[b]));
                }
                dofs[3 + i] = it->second;
            }
        }
    }
    dof_count_ = static_cast<std::size_t>(next);

    double arc = 0.0;
    for (const auto& e : mesh_.boundary_edges) {
        const double len = (mesh_.vertices[e[1]] - mesh_.vertices[e[0]]).norm();
        boundary_dofs_.push_back(e[0]);
        boundary_arc_.push_back(arc);
        if (order_ == 2) {
            boundary_dofs_.push_back(edge_dof.at(edge_key(e[0], e[1])));
            boundary_arc_.push_back(arc + 0.5 * len);
        }
        arc += len;
    }
}

std::array<std::size_t, 3> FemSpace::boundary_edge_nodes(std::size_t k) const {
    const std::size_t nb = boundary_dofs_.size();
    if (order_ == 1) return {k, (k + 1) % nb, (k + 1) % nb};
    return {2 * k, 2 * k + 1, (2 * k + 2) % nb};
}

double FemSpace::boundary_edge_length(std::size_t k) const {
    const auto& e = mesh_.boundary_edges[k];
    return (mesh_.vertices[e[1]] - mesh_.vertices[e[0]]).norm();
}

SteklovMatrices assemble(const FemSpace& space) {
    const TriangleMesh& mesh = space.mesh();
    const int nloc = space.order() == 1 ? 3 : 6;
    std::vector<Eigen::Triplet<double>> kt;
    kt.reserve(mesh.triangle_count() * static_cast<std::size_t>(nloc * nloc));

    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles[t];
        const double area = mesh.triangle_area(t);
        std::array<Vec2, 3> gl;
        for (int i = 0; i < 3; ++i) {
            const Vec2 e = mesh.vertices[tri[(i + 2) % 3]] - mesh.vertices[tri[(i + 1) % 3]];
            gl[i] = Vec2(-e.y(), e.x()) / (2.0 * area);
        }
        const auto& dofs = space.cell_dofs(t);
        Eigen::Matrix<double, 6, 6> ke = Eigen::Matrix<double, 6, 6>::Zero();
        if (space.order() == 1) {
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) ke(i, j) = area * gl[i].dot(gl[j]);
            }
        } else {
            // Edge-midpoint rule, exact for the quadratic integrand.
            for (int q = 0; q < 3; ++q) {
                std::array<double, 3> lam{0.5, 0.5, 0.5};
                lam[q] = 0.0;
                std::array<Vec2, 6> g;
                for (int i = 0; i < 3; ++i) {
                    g[i] = (4.0 * lam[i] - 1.0) * gl[i];
                    const int j = (i + 1) % 3;
                    const int k = (i + 2) % 3;
                    g[3 + i] = 4.0 * (lam[j] * gl[k] + lam[k] * gl[j]);
                }
                for (int i = 0; i < 6; ++i) {
                    for (int j = 0; j < 6; ++j) ke(i, j) += area / 3.0 * g[i].dot(g[j]);
                }
            }
        }
        for (int i = 0; i < nloc; ++i) {
            for (int j = 0; j < nloc; ++j) kt.emplace_back(dofs[i], dofs[j], ke(i, j));
        }
    }

    std::vector<Eigen::Triplet<double>> bt;
    const auto& bdofs = space.boundary_dofs();
    for (std::size_t k = 0; k < space.boundary_edge_count(); ++k) {
        const double len = space.boundary_edge_length(k);
        const auto nodes = space.boundary_edge_nodes(k);
        if (space.order() == 1) {
            const int a = bdofs[nodes[0]], b = bdofs[nodes[1]];
            bt.emplace_back(a, a, len / 3.0);
            bt.emplace_back(b, b, len / 3.0);
            bt.emplace_back(a, b, len / 6.0);
            bt.emplace_back(b, a, len / 6.0);
        } else {
            static constexpr double m[3][3] = {{4, 2, -1}, {2, 16, 2}, {-1, 2, 4}};
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) {
                    bt.emplace_back(bdofs[nodes[i]], bdofs[nodes[j]], len / 30.0 * m[i][j]);
                }
            }
        }
    }

    const auto n = static_cast<Eigen::Index>(space.dof_count());
    SteklovMatrices out{SparseMatrix(n, n), SparseMatrix(n, n)};
    out.K.setFromTriplets(kt.begin(), kt.end());
    out.B.setFromTriplets(bt.begin(), bt.end());
    return out;
}

void SteklovSpectrum::edge_eval(std::size_t k, std::size_t j, double s, double& u, double& u_tau) const {
    const auto nb = static_cast<std::size_t>(traces.rows());
    const auto col = static_cast<Eigen::Index>(j);
    const double len = edge_lengths[k];
    if (order == 1) {
        const double ua = traces(static_cast<Eigen::Index>(k), col);
        const double ub = traces(static_cast<Eigen::Index>((k + 1) % nb), col);
        u = (1.0 - s) * ua + s * ub;
        u_tau = (ub - ua) / len;
        return;
    }
    const double ua = traces(static_cast<Eigen::Index>(2 * k), col);
    const double um = traces(static_cast<Eigen::Index>(2 * k + 1), col);
    const double ub = traces(static_cast<Eigen::Index>((2 * k + 2) % nb), col);
    u = ua * (1.0 - s) * (1.0 - 2.0 * s) + um * 4.0 * s * (1.0 - s) + ub * s * (2.0 * s - 1.0);
    u_tau = (ua * (4.0 * s - 3.0) + um * (4.0 - 8.0 * s) + ub * (4.0 * s - 1.0)) / len;
}

namespace {

// Boundary/interior split of the dofs.
struct DofSplit {
    std::vector<Eigen::Index> bpos;
    std::vector<Eigen::Index> ipos;
    Eigen::Index nb = 0;
    Eigen::Index ni = 0;

    explicit DofSplit(const FemSpace& space) {
        const auto& bdofs = space.boundary_dofs();
        const auto n = space.dof_count();
        nb = static_cast<Eigen::Index>(bdofs.size());
        bpos.assign(n, -1);
        ipos.assign(n, -1);
        for (Eigen::Index i = 0; i < nb; ++i) bpos[static_cast<std::size_t>(bdofs[static_cast<std::size_t>(i)])] = i;
        for (std::size_t d = 0; d < n; ++d) {
            if (bpos[d] < 0) ipos[d] = ni++;
        }
    }
};

void solve_dense(const FemSpace& space, const SteklovMatrices& mats, std::size_t m, const DofSplit& ds,
                 SteklovSpectrum& spec) {
    const auto& bdofs = space.boundary_dofs();
    const auto n = static_cast<Eigen::Index>(space.dof_count());
    const Eigen::Index nb = ds.nb;
    const Eigen::Index ni = ds.ni;
    const auto& bpos = ds.bpos;
    const auto& ipos = ds.ipos;

    std::vector<Eigen::Triplet<double>> tii, tib;
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(nb, nb);
    for (Eigen::Index c = 0; c < mats.K.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(mats.K, c); it; ++it) {
            const auto r = static_cast<std::size_t>(it.row());
            const auto col = static_cast<std::size_t>(it.col());
            if (ipos[r] >= 0 && ipos[col] >= 0) {
                tii.emplace_back(ipos[r], ipos[col], it.value());
            } else if (ipos[r] >= 0) {
                tib.emplace_back(ipos[r], bpos[col], it.value());
            } else if (bpos[r] >= 0 && bpos[col] >= 0) {
                S(bpos[r], bpos[col]) += it.value();
            }
        }
    }
    Eigen::MatrixXd Bbb = Eigen::MatrixXd::Zero(nb, nb);
    for (Eigen::Index c = 0; c < mats.B.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(mats.B, c); it; ++it) {
            Bbb(bpos[static_cast<std::size_t>(it.row())], bpos[static_cast<std::size_t>(it.col())]) += it.value();
        }
    }

    Eigen::MatrixXd X;
    if (ni > 0) {
        SparseMatrix Kii(ni, ni);
        Kii.setFromTriplets(tii.begin(), tii.end());
        Eigen::SimplicialLDLT<SparseMatrix> ldlt(Kii);
        if (ldlt.info() != Eigen::Success) throw SolverFailure("interior stiffness block is singular");
        SparseMatrix Kib(ni, nb);
        Kib.setFromTriplets(tib.begin(), tib.end());
        X = ldlt.solve(Eigen::MatrixXd(Kib));
        if (ldlt.info() != Eigen::Success) throw SolverFailure("interior solve failed");
        const SparseMatrix Kbi = Kib.transpose();
        S.noalias() -= Kbi * X;
    }
    S = 0.5 * (S + S.transpose()).eval();

    const auto cols = static_cast<Eigen::Index>(m) + 1;
    {
        // Only the lowest m+1 pairs are needed; LAPACK's expert driver
        // computes a selected index range.
        Eigen::MatrixXd A = S;
        Eigen::MatrixXd Bw = Bbb;
        Eigen::VectorXd w(nb);
        Eigen::MatrixXd Z(nb, cols);
        std::vector<lapack_int> ifail(static_cast<std::size_t>(nb));
        lapack_int found = 0;
        const auto ln = static_cast<lapack_int>(nb);
        const lapack_int info = LAPACKE_dsygvx(LAPACK_COL_MAJOR, 1, 'V', 'I', 'U', ln, A.data(), ln, Bw.data(), ln,
                                               0.0, 0.0, 1, static_cast<lapack_int>(cols),
                                               2.0 * LAPACKE_dlamch('S'), &found, w.data(), Z.data(), ln,
                                               ifail.data());
        if (info != 0 || found != static_cast<lapack_int>(cols)) {
            throw SolverFailure("boundary eigenproblem failed (LAPACK info " + std::to_string(info) + ")");
        }
        spec.eigenvalues = w.head(cols);
        spec.traces = std::move(Z);
    }

    const double scale = S.norm();
    for (Eigen::Index j = 0; j < cols; ++j) {
        auto y = spec.traces.col(j);
        Eigen::Index imax = 0;
        y.cwiseAbs().maxCoeff(&imax);
        if (y[imax] < 0) y = -y;
        const double res = (S * y - spec.eigenvalues[j] * (Bbb * y)).norm();
        if (res > 1e-8 * scale * y.norm()) {
            throw SolverFailure("eigenpair " + std::to_string(j) + " residual " + std::to_string(res));
        }
    }

    spec.functions = Eigen::MatrixXd::Zero(n, cols);
    for (Eigen::Index i = 0; i < nb; ++i) spec.functions.row(bdofs[static_cast<std::size_t>(i)]) = spec.traces.row(i);
    if (ni > 0) {
        const Eigen::MatrixXd interior = -X * spec.traces;
        for (Eigen::Index d = 0; d < n; ++d) {
            const Eigen::Index r = ipos[static_cast<std::size_t>(d)];
            if (r >= 0) spec.functions.row(d) = interior.row(r);
        }
    }
}

// Block Krylov iteration for T = (S + tau B_bb)^{-1} B_bb, whose largest
// eigenvalues 1 / (sigma + tau) belong to the smallest Steklov eigenvalues.
// T is applied through the full system K + tau B, whose solution with a
// boundary right-hand side is the discrete harmonic extension of T y, so S is
// never formed.
void solve_krylov(const FemSpace& space, const SteklovMatrices& mats, std::size_t m, const DofSplit& ds,
                  SteklovSpectrum& spec) {
    const auto& bdofs = space.boundary_dofs();
    const auto n = static_cast<Eigen::Index>(space.dof_count());
    const Eigen::Index nb = ds.nb;
    const auto cols = static_cast<Eigen::Index>(m) + 1;
    constexpr Eigen::Index kBlock = 4;
    constexpr double kTol = 1e-10;

    // tau ~ perimeter / area keeps the shift scale-covariant.
    const double perimeter = mats.B.sum();
    const double tau = 0.25 * perimeter / std::max(space.mesh().area(), 1e-300);
    const SparseMatrix A = mats.K + tau * mats.B;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw SolverFailure("shifted stiffness matrix is singular");

    SparseMatrix Bbb(nb, nb);
    {
        std::vector<Eigen::Triplet<double>> tb;
        for (Eigen::Index c = 0; c < mats.B.outerSize(); ++c) {
            for (SparseMatrix::InnerIterator it(mats.B, c); it; ++it) {
                tb.emplace_back(ds.bpos[static_cast<std::size_t>(it.row())], ds.bpos[static_cast<std::size_t>(it.col())],
                                it.value());
            }
        }
        Bbb.setFromTriplets(tb.begin(), tb.end());
    }
    auto bdot = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.dot(Bbb * b); };

    Eigen::MatrixXd V(nb, 0);    // B-orthonormal Krylov basis
    Eigen::MatrixXd Wf(n, 0);    // full-space T V
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> normal(0.0, 1.0);

    auto apply = [&](const Eigen::VectorXd& y) {
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
        const Eigen::VectorXd w = Bbb * y;
        for (Eigen::Index i = 0; i < nb; ++i) rhs[bdofs[static_cast<std::size_t>(i)]] = w[i];
        Eigen::VectorXd z = ldlt.solve(rhs);
        if (ldlt.info() != Eigen::Success) throw SolverFailure("shifted solve failed");
        return z;
    };
    auto boundary_part = [&](const Eigen::VectorXd& z) {
        Eigen::VectorXd y(nb);
        for (Eigen::Index i = 0; i < nb; ++i) y[i] = z[bdofs[static_cast<std::size_t>(i)]];
        return y;
    };
    // Appends x to the basis after B-orthogonalization; false if it lies in span(V).
    auto extend = [&](Eigen::VectorXd x) {
        const double x0 = std::sqrt(std::max(bdot(x, x), 0.0));
        if (!(x0 > 0.0)) return false;
        for (int pass = 0; pass < 2; ++pass) x -= V * (V.transpose() * (Bbb * x));
        const double nx = std::sqrt(std::max(bdot(x, x), 0.0));
        if (!(nx > 1e-10 * x0)) return false;
        x /= nx;
        V.conservativeResize(nb, V.cols() + 1);
        V.col(V.cols() - 1) = x;
        Wf.conservativeResize(n, Wf.cols() + 1);
        Wf.col(Wf.cols() - 1) = apply(x);
        return true;
    };

    Eigen::MatrixXd next(nb, kBlock);
    for (Eigen::Index j = 0; j < kBlock; ++j) {
        for (Eigen::Index i = 0; i < nb; ++i) next(i, j) = normal(rng);
    }
    Eigen::Index target = std::min<Eigen::Index>(nb, std::max<Eigen::Index>(3 * cols + 2 * kBlock, 32));
    Eigen::VectorXd mu;
    Eigen::MatrixXd ritz;
    while (true) {
        const Eigen::Index before = V.cols();
        for (Eigen::Index j = 0; j < next.cols() && V.cols() < nb; ++j) {
            if (!extend(next.col(j))) {
                Eigen::VectorXd r(nb);
                for (Eigen::Index i = 0; i < nb; ++i) r[i] = normal(rng);
                extend(r);
            }
        }
        if (V.cols() < target && V.cols() < nb && V.cols() > before) {
            next.resize(nb, V.cols() - before);
            for (Eigen::Index j = before; j < V.cols(); ++j) next.col(j - before) = boundary_part(Wf.col(j));
            continue;
        }
        if (V.cols() < cols) throw SolverFailure("Krylov basis collapsed");

        Eigen::MatrixXd Wb(nb, V.cols());
        for (Eigen::Index j = 0; j < V.cols(); ++j) Wb.col(j) = boundary_part(Wf.col(j));
        Eigen::MatrixXd H = V.transpose() * (Bbb * Wb);
        H = 0.5 * (H + H.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        // Largest mu first.
        mu = es.eigenvalues().reverse().head(cols);
        ritz = es.eigenvectors().rowwise().reverse().leftCols(cols);
        bool converged = true;
        for (Eigen::Index j = 0; j < cols && converged; ++j) {
            const Eigen::VectorXd r = Wb * ritz.col(j) - mu[j] * (V * ritz.col(j));
            converged = std::sqrt(std::max(bdot(r, r), 0.0)) <= kTol * std::abs(mu[j]);
        }
        if (converged || V.cols() >= nb) break;
        if (V.cols() == before) throw SolverFailure("Krylov iteration stalled");
        target = std::min(nb, V.cols() + 2 * kBlock);
        next.resize(nb, V.cols() - before);
        for (Eigen::Index j = before; j < V.cols(); ++j) next.col(j - before) = boundary_part(Wf.col(j));
    }

    // One more application of T to the Ritz vectors, then Rayleigh-Ritz in
    // (K, B) on their exact harmonic extensions.
    const Eigen::MatrixXd Z = Wf * ritz;
    Eigen::MatrixXd Kp = Z.transpose() * (mats.K * Z);
    Eigen::MatrixXd Bp = Z.transpose() * (mats.B * Z);
    Kp = 0.5 * (Kp + Kp.transpose()).eval();
    Bp = 0.5 * (Bp + Bp.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(Kp, Bp);
    if (ges.info() != Eigen::Success) throw SolverFailure("projected eigenproblem failed");
    spec.eigenvalues = ges.eigenvalues();
    spec.functions = Z * ges.eigenvectors();
    spec.traces.resize(nb, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        auto f = spec.functions.col(j);
        Eigen::Index imax = 0;
        boundary_part(f).cwiseAbs().maxCoeff(&imax);
        if (f[bdofs[static_cast<std::size_t>(imax)]] < 0) f = -f;
        spec.traces.col(j) = boundary_part(f);
    }

    const double scale = mats.K.norm();
    for (Eigen::Index j = 0; j < cols; ++j) {
        const auto f = spec.functions.col(j);
        const double res = (mats.K * f - spec.eigenvalues[j] * (mats.B * f)).norm();
        if (res > 1e-8 * scale * f.norm()) {
            throw SolverFailure("eigenpair " + std::to_string(j) + " residual " + std::to_string(res));
        }
    }
}

} // namespace

SteklovSpectrum solve_spectrum(const FemSpace& space, const SteklovMatrices& mats, std::size_t m,
                               EigenMethod method) {
    const DofSplit ds(space);
    if (static_cast<Eigen::Index>(m) + 1 > ds.nb) {
        throw SolverFailure("requested " + std::to_string(m + 1) + " eigenvalues but only " +
                            std::to_string(ds.nb) + " boundary unknowns");
    }
    SteklovSpectrum spec;
    spec.order = space.order();
    if (method == EigenMethod::Dense) {
        solve_dense(space, mats, m, ds, spec);
    } else {
        solve_krylov(space, mats, m, ds, spec);
    }
    spec.eigenvalues[0] = std::max(spec.eigenvalues[0], 0.0);
    const auto cols = static_cast<Eigen::Index>(m) + 1;
    const Eigen::Index nb = ds.nb;

    const std::size_t ne = space.boundary_edge_count();
    spec.edge_lengths.resize(ne);
    for (std::size_t k = 0; k < ne; ++k) spec.edge_lengths[k] = space.boundary_edge_length(k);

    spec.tangential = Eigen::MatrixXd::Zero(nb, cols);
    for (std::size_t k = 0; k < ne; ++k) {
        const auto nodes = space.boundary_edge_nodes(k);
        for (Eigen::Index j = 0; j < cols; ++j) {
            double u = 0.0, d0 = 0.0, d1 = 0.0;
            spec.edge_eval(k, static_cast<std::size_t>(j), 0.0, u, d0);
            spec.edge_eval(k, static_cast<std::size_t>(j), 1.0, u, d1);
            spec.tangential(static_cast<Eigen::Index>(nodes[0]), j) += 0.5 * d0;
            spec.tangential(static_cast<Eigen::Index>(nodes[2]), j) += 0.5 * d1;
            if (space.order() == 2) {
                spec.edge_eval(k, static_cast<std::size_t>(j), 0.5, u, d0);
                spec.tangential(static_cast<Eigen::Index>(nodes[1]), j) = d0;
            }
        }
    }
    return spec;
}

SteklovSpectrum steklov_spectrum(const TriangleMesh& mesh, std::size_t m, int order, EigenMethod method) {
    FemSpace space(mesh, order);
    return solve_spectrum(space, assemble(space), m, method);
}


double rayleigh_quotient(const SteklovMatrices& mats, const Eigen::VectorXd& v) {
    const double num = v.dot(mats.K * v);
    const double den = v.dot(mats.B * v);
    if (!(den > 1e-14 * std::abs(num)) || den <= 0.0) throw ZeroBoundaryTrace();
    return num / den;
}

} // namespace steklov
