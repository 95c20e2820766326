#include "steklov/optimizer.hpp"

#include "steklov/errors.hpp"
#include "steklov/experiments.hpp"
#include "steklov/qp.hpp"
#include "steklov/shape_gradient.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace steklov {

std::string to_string(ConstraintTag tag) {
    switch (tag) {
    case ConstraintTag::Convexity: return "convexity";
    case ConstraintTag::Width: return "width";
    case ConstraintTag::Anchor: return "anchor";
    case ConstraintTag::Positivity: return "positivity";
    case ConstraintTag::Order: return "order";
    case ConstraintTag::Box: return "box";
    }
    return "unknown";
}

std::size_t LinearConstraintSet::count(ConstraintTag tag) const {
    return static_cast<std::size_t>(std::count(tags.begin(), tags.end(), tag));
}

void LinearConstraintSet::add(const Eigen::VectorXd& row, double bound, Sense sense, ConstraintTag tag) {
    const Eigen::Index r = coeffs.rows();
    if (r > 0 && row.size() != coeffs.cols()) throw Error("optimizer", "constraint row has wrong length");
    coeffs.conservativeResize(r + 1, row.size());
    coeffs.row(r) = row.transpose();
    bounds.conservativeResize(r + 1);
    bounds[r] = bound;
    senses.push_back(sense);
    tags.push_back(tag);
}

Eigen::VectorXd LinearConstraintSet::residuals(const Eigen::VectorXd& x) const {
    Eigen::VectorXd r = coeffs * x - bounds;
    for (std::size_t i = 0; i < senses.size(); ++i) {
        if (senses[i] == Sense::LessEqual) r[static_cast<Eigen::Index>(i)] = -r[static_cast<Eigen::Index>(i)];
    }
    return r;
}

std::size_t LinearConstraintSet::active_count(const Eigen::VectorXd& x, double tol) const {
    const Eigen::VectorXd r = residuals(x);
    return static_cast<std::size_t>((r.array().abs() <= tol).count());
}

int LinearConstraintSet::as_greater_equal(Eigen::MatrixXd& C, Eigen::VectorXd& b) const {
    const std::size_t m = rows();
    std::vector<char> merged(m, 0);
    std::vector<Eigen::Index> eq;
    for (std::size_t a = 0; a < m; ++a) {
        if (tags[a] != ConstraintTag::Anchor) continue;
        for (std::size_t w = 0; w < m; ++w) {
            if (merged[w] || tags[w] != ConstraintTag::Width || senses[w] == senses[a]) continue;
            const auto ia = static_cast<Eigen::Index>(a);
            const auto iw = static_cast<Eigen::Index>(w);
            if (bounds[ia] == bounds[iw] && coeffs.row(ia) == coeffs.row(iw)) {
                merged[a] = merged[w] = 1;
                eq.push_back(senses[a] == Sense::GreaterEqual ? ia : iw);
                break;
            }
        }
    }
    const auto n = coeffs.cols();
    C.resize(n, static_cast<Eigen::Index>(m - eq.size()));
    b.resize(C.cols());
    Eigen::Index c = 0;
    for (Eigen::Index r : eq) {
        C.col(c) = coeffs.row(r).transpose();
        b[c++] = bounds[r];
    }
    for (std::size_t r = 0; r < m; ++r) {
        if (merged[r]) continue;
        const auto ir = static_cast<Eigen::Index>(r);
        const double s = senses[r] == Sense::GreaterEqual ? 1.0 : -1.0;
        C.col(c) = s * coeffs.row(ir).transpose();
        b[c++] = s * bounds[ir];
    }
    return static_cast<int>(eq.size());
}

void OptimOptions::validate() const {
    if (n_angles < 8 || n_angles % 2 != 0) throw ConfigError("n_angles", "must be even and >= 8");
    if (!(diameter > 0.0)) throw ConfigError("diameter", "must be positive");
    if (k < 1) throw ConfigError("k", "must be >= 1");
    if (max_iters < 0) throw ConfigError("max_iters", "must be non-negative");
    if (!(step0 > 0.0)) throw ConfigError("step0", "must be positive");
    if (!(smoothing >= 0.0)) throw ConfigError("smoothing", "must be non-negative");
    if (!(backtrack > 0.0 && backtrack < 1.0)) throw ConfigError("backtrack", "must lie in (0, 1)");
    if (!(armijo > 0.0 && armijo < 1.0)) throw ConfigError("armijo", "must lie in (0, 1)");
    if (!(stop_tol > 0.0)) throw ConfigError("stop_tol", "must be positive");
    if (stop_window < 1) throw ConfigError("stop_window", "must be positive");
    if (!(cluster_tol > 0.0) || !(cluster_window >= 0.0)) throw ConfigError("cluster_tol", "must be positive");
    if (!(mesh_factor > 0.0)) throw ConfigError("mesh_factor", "must be positive");
    if (!(positivity_factor > 0.0) || !(convexity_floor_factor >= 0.0) || !(gap_factor > 0.0)) {
        throw ConfigError("positivity_factor", "floors must be positive");
    }
    if (restarts < 0) throw ConfigError("restarts", "must be non-negative");
    if (element_order != 1 && element_order != 2) throw ConfigError("element_order", "must be 1 or 2");
}

double GraphPair::abscissa(std::size_t i) const {
    return -0.5 * diameter + static_cast<double>(i + 1) * diameter / static_cast<double>(size() + 1);
}

BoundaryPolyline GraphPair::boundary() const {
    const std::size_t n = size();
    BoundaryPolyline b;
    b.vertices.reserve(2 * n + 2);
    b.vertices.emplace_back(-0.5 * diameter, 0.0);
    for (std::size_t i = 0; i < n; ++i) b.vertices.emplace_back(abscissa(i), p[static_cast<Eigen::Index>(i)]);
    b.vertices.emplace_back(0.5 * diameter, 0.0);
    for (std::size_t i = n; i-- > 0;) b.vertices.emplace_back(abscissa(i), q[static_cast<Eigen::Index>(i)]);
    return b;
}

GraphPair GraphPair::disk(std::size_t n, double diameter) {
    GraphPair g;
    g.diameter = diameter;
    g.p.resize(static_cast<Eigen::Index>(n));
    g.q.resize(static_cast<Eigen::Index>(n));
    const double r = 0.5 * diameter;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = g.abscissa(i);
        const double y = std::sqrt(std::max(r * r - x * x, 0.0));
        g.p[static_cast<Eigen::Index>(i)] = -y;
        g.q[static_cast<Eigen::Index>(i)] = y;
    }
    return g;
}

GraphPair GraphPair::from_boundary(const BoundaryPolyline& b, std::size_t n, double diameter) {
    if (b.size() < 3 || n < 2) throw Error("optimizer", "graph sampling needs a polygon and two abscissae");
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 1; i < b.size(); ++i) {
        if (b[i].x() < b[lo].x()) lo = i;
        if (b[i].x() > b[hi].x()) hi = i;
    }
    const double width = b[hi].x() - b[lo].x();
    if (std::abs(width - diameter) > 1e-6 * diameter) {
        throw Error("optimizer", "polygon width " + std::to_string(width) + " differs from the diameter");
    }
    const Vec2 left = b[lo];
    const double slope = (b[hi].y() - left.y()) / width;
    auto map = [&](const Vec2& v) {
        return Vec2(v.x() - left.x() - 0.5 * diameter, v.y() - left.y() - slope * (v.x() - left.x()));
    };

    GraphPair g;
    g.diameter = diameter;
    g.p.resize(static_cast<Eigen::Index>(n));
    g.q.resize(static_cast<Eigen::Index>(n));
    // Counterclockwise, the chain lo -> hi is the lower graph and hi -> lo the upper one.
    auto sample = [&](std::size_t from, std::size_t to, Eigen::VectorXd& out, bool increasing) {
        std::vector<Vec2> chain;
        for (std::size_t i = from;; i = b.next(i)) {
            chain.push_back(map(b[i]));
            if (i == to) break;
        }
        if (!increasing) std::reverse(chain.begin(), chain.end());
        for (std::size_t j = 0; j + 1 < chain.size(); ++j) {
            if (chain[j + 1].x() < chain[j].x()) throw Error("optimizer", "boundary is not a pair of graphs");
        }
        std::size_t seg = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = g.abscissa(i);
            while (seg + 2 < chain.size() && chain[seg + 1].x() < x) ++seg;
            const Vec2& a = chain[seg];
            const Vec2& c = chain[seg + 1];
            const double s = c.x() > a.x() ? std::clamp((x - a.x()) / (c.x() - a.x()), 0.0, 1.0) : 0.5;
            out[static_cast<Eigen::Index>(i)] = a.y() + s * (c.y() - a.y());
        }
    };
    sample(lo, hi, g.p, true);
    sample(hi, lo, g.q, false);
    return g;
}

SupportVector OptimState::support(std::size_t n_angles) const {
    if (mode != Mode::Convex || static_cast<std::size_t>(x.size()) != n_angles) {
        throw Error("optimizer", "state does not hold a support vector of this size");
    }
    return SupportVector(AngleGrid(n_angles), x);
}

GraphPair OptimState::graphs(double diameter) const {
    if (mode != Mode::NonConvex || x.size() % 2 != 0) throw Error("optimizer", "state does not hold graphs");
    GraphPair g;
    g.diameter = diameter;
    const Eigen::Index n = x.size() / 2;
    g.p = x.head(n);
    g.q = x.tail(n);
    return g;
}

Evaluation evaluate(const BoundaryPolyline& b, std::size_t k, std::size_t m, double mesh_h, int order) {
    return evaluate(b, triangulate(b, mesh_h), k, m, order);
}

Evaluation evaluate(const BoundaryPolyline& b, TriangleMesh mesh, std::size_t k, std::size_t m, int order) {
    if (m < k) throw Error("optimizer", "eigenpair count below k");
    Evaluation ev;
    ev.boundary = b;
    ev.mesh = std::move(mesh);
    ev.spectrum = steklov_spectrum(ev.mesh, m, order);
    ev.diameter = compute_diameter(b);
    ev.area = std::abs(b.signed_area());
    ev.sigma = ev.spectrum.sigma(k);
    ev.objective = ev.sigma * ev.diameter.diameter;
    return ev;
}

LinearConstraintSet build_constraints(const OptimOptions& opts) {
    opts.validate();
    const std::size_t n = opts.n_angles;
    const auto N = static_cast<Eigen::Index>(n);
    const AngleGrid grid(n);
    const double inv_h2 = 1.0 / (grid.step() * grid.step());
    const double d = opts.diameter;
    LinearConstraintSet cons;
    cons.coeffs.resize(0, N);

    for (std::size_t i = 0; i < n; ++i) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(N);
        row[static_cast<Eigen::Index>(i)] += 1.0 - 2.0 * inv_h2;
        row[static_cast<Eigen::Index>(grid.next(i))] += inv_h2;
        row[static_cast<Eigen::Index>(grid.prev(i))] += inv_h2;
        cons.add(row, opts.convexity_floor_factor * d, Sense::GreaterEqual, ConstraintTag::Convexity);
    }
    for (std::size_t i = 0; i < n / 2; ++i) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(N);
        row[static_cast<Eigen::Index>(i)] = 1.0;
        row[static_cast<Eigen::Index>(grid.opposite(i))] = 1.0;
        cons.add(row, d, Sense::LessEqual, ConstraintTag::Width);
    }
    {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(N);
        row[0] = 1.0;
        row[static_cast<Eigen::Index>(n / 2)] = 1.0;
        cons.add(row, d, Sense::GreaterEqual, ConstraintTag::Anchor);
    }
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(N);
        row[static_cast<Eigen::Index>(i)] = 1.0;
        cons.add(row, opts.positivity_factor * d, Sense::GreaterEqual, ConstraintTag::Positivity);
    }
    return cons;
}

LinearConstraintSet build_graph_constraints(std::size_t n, const OptimOptions& opts) {
    opts.validate();
    if (n < 2) throw Error("optimizer", "graphs need at least two interior points");
    const auto N = static_cast<Eigen::Index>(n);
    const double d = opts.diameter;
    LinearConstraintSet cons;
    cons.coeffs.resize(0, 2 * N);
    for (Eigen::Index i = 0; i < N; ++i) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(2 * N);
        row[i] = -1.0;
        row[N + i] = 1.0;
        cons.add(row, opts.gap_factor * d, Sense::GreaterEqual, ConstraintTag::Order);
    }
    for (Eigen::Index i = 0; i < 2 * N; ++i) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(2 * N);
        row[i] = 1.0;
        cons.add(row, -d, Sense::GreaterEqual, ConstraintTag::Box);
        cons.add(row, d, Sense::LessEqual, ConstraintTag::Box);
    }
    return cons;
}

Eigen::VectorXd project(const Eigen::VectorXd& x, const LinearConstraintSet& cons) {
    if (x.size() != cons.coeffs.cols()) throw Error("optimizer", "variable count does not match constraints");
    Eigen::MatrixXd C;
    Eigen::VectorXd b;
    const int n_eq = cons.as_greater_equal(C, b);
    const Eigen::MatrixXd G = Eigen::MatrixXd::Identity(x.size(), x.size());
    return solve_qp(G, -x, C, b, n_eq).x;
}

Eigen::VectorXd graph_gradient(const GraphPair& g, const Evaluation& ev, std::size_t k, double tol) {
    const ShapeSensitivity s(ev.boundary, ev.mesh, ev.spectrum);
    if (tol > 0.0) s.require_simple(k, tol);
    const auto hats = s.hat_matrices(k, k, Vec2(0.0, 1.0));
    const std::size_t n = g.size();
    Eigen::VectorXd grad(static_cast<Eigen::Index>(2 * n));
    for (std::size_t i = 0; i < n; ++i) {
        grad[static_cast<Eigen::Index>(i)] = hats[GraphPair::lower_vertex(i)](0, 0);
        grad[static_cast<Eigen::Index>(n + i)] = hats[g.upper_vertex(i)](0, 0);
    }
    return grad;
}

namespace {

constexpr int kCutRounds = 20;

// Mode-specific pieces of the ascent loop.
struct Problem {
    Mode mode = Mode::Convex;
    std::size_t n_angles = 0;
    double diameter = 2.0;

    BoundaryPolyline boundary(const Eigen::VectorXd& x) const {
        if (mode == Mode::Convex) return reconstruct_boundary(SupportVector(AngleGrid(n_angles), x));
        GraphPair g;
        g.diameter = diameter;
        const Eigen::Index n = x.size() / 2;
        g.p = x.head(n);
        g.q = x.tail(n);
        return g.boundary();
    }

    // Polyline vertex moved by each variable and the motion direction
    // (zero vector: normal motion).
    std::vector<std::size_t> vertex_of(Eigen::Index nvars) const {
        std::vector<std::size_t> v(static_cast<std::size_t>(nvars));
        if (mode == Mode::Convex) {
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
        } else {
            const std::size_t n = v.size() / 2;
            for (std::size_t i = 0; i < n; ++i) {
                v[i] = GraphPair::lower_vertex(i);
                v[n + i] = 2 * n + 1 - i;
            }
        }
        return v;
    }
};

// Gradient data of the eigenvalue cluster {k, ..., k + c - 1}: gaps
// sigma_j - sigma_k and per-variable c x c derivative matrices.
struct ClusterModel {
    Eigen::VectorXd gaps;
    std::vector<Eigen::MatrixXd> G;
    /// Step metric: boundary-length weights plus a first-difference penalty.
    Eigen::MatrixXd metric;

    std::size_t size() const { return static_cast<std::size_t>(gaps.size()); }

    Eigen::MatrixXd derivative(const Eigen::VectorXd& d) const {
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(gaps.size(), gaps.size());
        for (std::size_t i = 0; i < G.size(); ++i) M += d[static_cast<Eigen::Index>(i)] * G[i];
        return M;
    }

    // Smallest eigenvalue of diag(gaps) + alpha M and its eigenvector.
    double lowest(const Eigen::MatrixXd& M, double alpha, Eigen::VectorXd* w = nullptr) const {
        Eigen::MatrixXd A = alpha * M;
        A.diagonal() += gaps;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
        if (w) *w = es.eigenvectors().col(0);
        return es.eigenvalues()[0];
    }
};

ClusterModel build_model(const Problem& pb, const Evaluation& ev, std::size_t k, const OptimOptions& opts,
                         Eigen::Index nvars) {
    const ShapeSensitivity s(ev.boundary, ev.mesh, ev.spectrum);
    const std::size_t last = cluster_end(ev.spectrum, k, opts.cluster_window);
    const std::size_t c = last - k + 1;
    const auto hats = pb.mode == Mode::Convex ? s.hat_matrices(k, last) : s.hat_matrices(k, last, Vec2(0.0, 1.0));
    const auto verts = pb.vertex_of(nvars);

    ClusterModel m;
    m.gaps.resize(static_cast<Eigen::Index>(c));
    for (std::size_t j = 0; j < c; ++j) m.gaps[static_cast<Eigen::Index>(j)] = ev.spectrum.sigma(k + j) - ev.sigma;
    m.G.reserve(verts.size());
    m.metric = Eigen::MatrixXd::Zero(nvars, nvars);
    const BoundaryPolyline& b = ev.boundary;
    for (std::size_t i = 0; i < verts.size(); ++i) {
        const std::size_t v = verts[i];
        m.G.push_back(hats[v]);
        // Boundary length carried by the hat function of the vertex.
        const double w = 0.5 * ((b.vertex(v + 1) - b[v]).norm() + (b[v] - b[b.prev(v)]).norm());
        m.metric(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = std::max(w, 1e-12 * pb.diameter);
    }
    // ell^2 sum (d_{i+1} - d_i)^2 / spacing over neighbouring variables, with
    // the fixed graph endpoints acting as zero neighbours.
    const double ell = opts.smoothing * pb.diameter;
    if (ell > 0.0) {
        auto couple = [&](Eigen::Index i, Eigen::Index j, double spacing) {
            const double c = ell * ell / spacing;
            m.metric(i, i) += c;
            if (j >= 0) {
                m.metric(j, j) += c;
                m.metric(i, j) -= c;
                m.metric(j, i) -= c;
            }
        };
        if (pb.mode == Mode::Convex) {
            const double spacing = 0.5 * pb.diameter * 2.0 * std::numbers::pi / static_cast<double>(nvars);
            for (Eigen::Index i = 0; i < nvars; ++i) couple(i, (i + 1) % nvars, spacing);
        } else {
            const Eigen::Index n = nvars / 2;
            const double spacing = pb.diameter / static_cast<double>(n + 1);
            for (Eigen::Index g = 0; g < 2; ++g) {
                couple(g * n, -1, spacing);
                couple(g * n + n - 1, -1, spacing);
                for (Eigen::Index i = 0; i + 1 < n; ++i) couple(g * n + i, g * n + i + 1, spacing);
            }
        }
    }
    return m;
}

// Maximizes  lambda_min(diag(gaps) + M(d)) - |d|_W^2 / (2t)  over feasible
// steps d by a cutting-plane QP in (d, s). Returns d and the model value.
Eigen::VectorXd ascent_step(const ClusterModel& model, const Eigen::VectorXd& x, const Eigen::MatrixXd& C,
                            const Eigen::VectorXd& b, int n_eq, double t, double sigma, double& model_gain) {
    const Eigen::Index n = x.size();
    const Eigen::Index m = C.cols();
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n + 1, n + 1);
    G.topLeftCorner(n, n) = model.metric / t;
    G(n, n) = 1e-3 / std::max(sigma, 1e-12);
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n + 1);
    a[n] = -1.0;

    const Eigen::VectorXd rhs = b - C.transpose() * x;
    std::vector<Eigen::VectorXd> cuts;
    for (Eigen::Index j = 0; j < model.gaps.size(); ++j) cuts.push_back(Eigen::VectorXd::Unit(model.gaps.size(), j));

    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    model_gain = 0.0;
    for (int round = 0; round < kCutRounds; ++round) {
        const auto nc = static_cast<Eigen::Index>(cuts.size());
        Eigen::MatrixXd CC = Eigen::MatrixXd::Zero(n + 1, m + nc);
        Eigen::VectorXd bb(m + nc);
        CC.topLeftCorner(n, m) = C;
        bb.head(m) = rhs;
        for (Eigen::Index j = 0; j < nc; ++j) {
            const Eigen::VectorXd& w = cuts[static_cast<std::size_t>(j)];
            for (Eigen::Index i = 0; i < n; ++i) CC(i, m + j) = w.dot(model.G[static_cast<std::size_t>(i)] * w);
            CC(n, m + j) = -1.0;
            bb[m + j] = -w.dot(model.gaps.cwiseProduct(w));
        }
        const QpResult qp = solve_qp(G, a, CC, bb, n_eq);
        d = qp.x.head(n);
        const double s = qp.x[n];
        Eigen::VectorXd w;
        model_gain = model.lowest(model.derivative(d), 1.0, &w);
        if (model.size() == 1 || model_gain >= s - 1e-9 * (std::abs(s) + sigma * 1e-6)) break;
        cuts.push_back(w);
    }
    return d;
}

bool is_candidate_error(const Error& e) {
    return dynamic_cast<const SelfIntersection*>(&e) || dynamic_cast<const MeshFailure*>(&e) ||
           dynamic_cast<const DegenerateBoundary*>(&e) || dynamic_cast<const SolverFailure*>(&e);
}

OptimState run_ascent(const Problem& pb, Eigen::VectorXd x, const LinearConstraintSet& cons,
                      const OptimOptions& opts) {
    opts.validate();
    const std::size_t k = opts.k;
    const std::size_t m = k + 3;
    const double mesh_h = opts.mesh_factor * opts.diameter;

    Eigen::MatrixXd C;
    Eigen::VectorXd b;
    const int n_eq = cons.as_greater_equal(C, b);

    OptimState st;
    st.mode = pb.mode;
    if ((cons.residuals(x).array() < -1e-10).any()) x = solve_qp(Eigen::MatrixXd::Identity(x.size(), x.size()), -x, C, b, n_eq).x;
    st.x = x;
    st.best = evaluate(pb.boundary(x), k, m, mesh_h, opts.element_order);

    auto record = [&](int iter, double t, std::size_t cluster) {
        HistoryEntry h;
        h.iteration = iter;
        h.sigma = st.best.sigma;
        h.objective = st.best.objective;
        h.step = t;
        h.active_rows = cons.active_count(st.x, 1e-9 * opts.diameter);
        h.cluster_size = cluster;
        st.history.push_back(h);
        if (!check_bound(st.best.sigma, st.best.area, st.best.diameter.diameter, k).passed) st.bound_held = false;
        if (opts.log) {
            *opts.log << h.iteration << '\t' << h.objective << '\t' << h.step << '\t' << h.active_rows << '\t'
                      << h.cluster_size << '\n';
        }
    };
    record(0, opts.step0, 1);

    double t = opts.step0;
    const double t_min = 1e-8 * opts.step0;
    const double t_max = 1e4 * opts.step0;
    st.stop_reason = "iteration limit";
    auto candidate = [&](const Eigen::VectorXd& xc) {
        return evaluate(pb.boundary(xc), k, m, mesh_h, opts.element_order);
    };
    double recorded = st.best.sigma;
    for (int iter = 1; iter <= opts.max_iters; ++iter) {
        st.iterations = iter;
        const ClusterModel model = build_model(pb, st.best, k, opts, x.size());

        bool accepted = false;
        double gain = 0.0;
        Eigen::VectorXd d;
        try {
            d = ascent_step(model, st.x, C, b, n_eq, t, st.best.sigma, gain);
        } catch (const ProjectionFailure&) {
            gain = 0.0;
        }
        if (gain > 1e-14 * st.best.sigma) {
            const Eigen::MatrixXd M = model.derivative(d);
            for (double alpha = 1.0; alpha >= 0.1; alpha *= opts.backtrack) {
                const Eigen::VectorXd cand = st.x + alpha * d;
                Evaluation ev;
                try {
                    ev = candidate(cand);
                } catch (const Error& e) {
                    if (!is_candidate_error(e)) throw;
                    ++st.rejected_candidates;
                    continue;
                }
                const double predicted = model.lowest(M, alpha);
                if (ev.sigma > recorded && ev.sigma - st.best.sigma >= opts.armijo * predicted) {
                    st.x = cand;
                    st.best = std::move(ev);
                    t = alpha == 1.0 ? std::min(2.0 * t, t_max) : alpha * t;
                    accepted = true;
                    break;
                }
            }
        }
        if (!accepted) {
            t /= 16.0;
            if (t < t_min) {
                st.converged = true;
                st.stop_reason = "no ascent at minimum step";
                break;
            }
            continue;
        }
        record(iter, t, model.size());
        recorded = st.best.sigma;
        const std::size_t nh = st.history.size();
        if (nh > static_cast<std::size_t>(opts.stop_window)) {
            const double old = st.history[nh - 1 - static_cast<std::size_t>(opts.stop_window)].sigma;
            if ((st.best.sigma - old) / st.best.sigma < opts.stop_tol) {
                st.converged = true;
                st.stop_reason = "objective change below tolerance";
                break;
            }
        }
    }
    return st;
}

// Random low-frequency Fourier perturbation with amplitudes decaying as 1/m^2.
Eigen::VectorXd fourier_noise(std::mt19937_64& rng, Eigen::Index n, double scale, bool periodic) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    for (int f = 2; f <= 6; ++f) {
        const double a = normal(rng) * scale / (f * f);
        const double c = normal(rng) * scale / (f * f);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double s = periodic ? 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n)
                                      : std::numbers::pi * static_cast<double>(i + 1) / static_cast<double>(n + 1);
            v[i] += periodic ? a * std::cos(f * s) + c * std::sin(f * s) : a * std::sin(f * s) + c * std::sin((f - 1) * s);
        }
    }
    return v;
}

OptimState best_of(const Problem& pb, std::vector<Eigen::VectorXd> starts, const LinearConstraintSet& cons,
                   const OptimOptions& opts) {
    std::vector<std::ostringstream> logs(starts.size());
    std::vector<std::future<OptimState>> runs;
    for (std::size_t r = 0; r < starts.size(); ++r) {
        OptimOptions o = opts;
        o.log = opts.log ? &logs[r] : nullptr;
        runs.push_back(std::async(std::launch::async, [&pb, &cons, o, x = starts[r]]() mutable {
            return run_ascent(pb, std::move(x), cons, o);
        }));
    }
    std::vector<OptimState> states;
    for (auto& f : runs) states.push_back(f.get());
    std::size_t best = 0;
    for (std::size_t r = 0; r < states.size(); ++r) {
        if (opts.log) *opts.log << "# run " << r << '\n' << logs[r].str();
        if (states[r].best.objective > states[best].best.objective) best = r;
    }
    return std::move(states[best]);
}

} // namespace

OptimState ascend(const SupportVector& initial, const OptimOptions& opts) {
    opts.validate();
    if (initial.size() != opts.n_angles) throw Error("optimizer", "initial support vector has the wrong size");
    Problem pb{Mode::Convex, opts.n_angles, opts.diameter};
    return run_ascent(pb, initial.p, build_constraints(opts), opts);
}

OptimState ascend_nonconvex(const GraphPair& initial, const OptimOptions& opts) {
    opts.validate();
    if (initial.p.size() != initial.q.size() || initial.size() < 2) throw Error("optimizer", "malformed graph pair");
    if (std::abs(initial.diameter - opts.diameter) > 1e-12 * opts.diameter) {
        throw Error("optimizer", "graph pair spans a different interval than the diameter");
    }
    Problem pb{Mode::NonConvex, opts.n_angles, opts.diameter};
    Eigen::VectorXd x(2 * initial.p.size());
    x << initial.p, initial.q;
    OptimState st = run_ascent(pb, std::move(x), build_graph_constraints(initial.size(), opts), opts);
    st.diameter_ok = st.best.diameter.diameter <= opts.diameter * (1.0 + 1e-3);
    return st;
}

OptimState optimize_convex(const OptimOptions& opts) {
    opts.validate();
    const Problem pb{Mode::Convex, opts.n_angles, opts.diameter};
    const LinearConstraintSet cons = build_constraints(opts);
    std::mt19937_64 rng(opts.seed);
    const auto n = static_cast<Eigen::Index>(opts.n_angles);
    std::vector<Eigen::VectorXd> starts{Eigen::VectorXd::Constant(n, 0.5 * opts.diameter)};
    for (int r = 0; r < opts.restarts; ++r) {
        const Eigen::VectorXd x = starts[0] + fourier_noise(rng, n, 0.1 * opts.diameter, true);
        starts.push_back(project(x, cons));
    }
    return best_of(pb, std::move(starts), cons, opts);
}

OptimState optimize_nonconvex(const OptimOptions& opts) {
    opts.validate();
    const std::size_t n = opts.n_angles / 2;
    const Problem pb{Mode::NonConvex, opts.n_angles, opts.diameter};
    const LinearConstraintSet cons = build_graph_constraints(n, opts);
    const GraphPair disk = GraphPair::disk(n, opts.diameter);
    const auto N = static_cast<Eigen::Index>(n);
    auto stack = [N](const GraphPair& g) {
        Eigen::VectorXd x(2 * N);
        x << g.p, g.q;
        return x;
    };
    const Eigen::VectorXd x0 = stack(disk);
    std::vector<Eigen::VectorXd> starts{x0};
    {
        OptimOptions c = opts;
        c.restarts = 0;
        c.log = nullptr;
        const OptimState convex = ascend(SupportVector::constant(opts.n_angles, 0.5 * opts.diameter), c);
        try {
            starts.push_back(project(stack(GraphPair::from_boundary(convex.best.boundary, n, opts.diameter)), cons));
        } catch (const Error&) {
            // The convex optimum could not be sampled as graphs; the other starts remain.
        }
    }
    std::mt19937_64 rng(opts.seed);
    for (int r = 0; r < opts.restarts; ++r) {
        Eigen::VectorXd x = x0;
        x.head(N) += fourier_noise(rng, N, 0.1 * opts.diameter, false);
        x.tail(N) += fourier_noise(rng, N, 0.1 * opts.diameter, false);
        starts.push_back(project(x, cons));
    }
    OptimState st = best_of(pb, std::move(starts), cons, opts);
    st.diameter_ok = st.best.diameter.diameter <= opts.diameter * (1.0 + 1e-3);
    return st;
}

} // namespace steklov
