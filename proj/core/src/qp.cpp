#include "steklov/qp.hpp"

#include "steklov/errors.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <string>

namespace steklov {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class DualActiveSet {
public:
    DualActiveSet(const Eigen::MatrixXd& G, const Eigen::VectorXd& a, const Eigen::MatrixXd& C,
                  const Eigen::VectorXd& b, int n_eq)
        : C_(C), b_(b), n_(G.rows()), m_(C.cols()), meq_(n_eq) {
        Eigen::LLT<Eigen::MatrixXd> llt(G);
        if (llt.info() != Eigen::Success) throw ProjectionFailure("QP Hessian is not positive definite");
        // J = L^{-T}, so J J^T = G^{-1}.
        const Eigen::MatrixXd L = llt.matrixL();
        J_ = L.transpose().triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(n_, n_));
        x_ = -llt.solve(a);
        f_ = 0.5 * a.dot(x_);
        R_ = Eigen::MatrixXd::Zero(n_, n_);
        u_.reserve(static_cast<std::size_t>(n_));
        active_.reserve(static_cast<std::size_t>(n_));
        norm_.resize(m_);
        for (Eigen::Index i = 0; i < m_; ++i) norm_[i] = std::max(C_.col(i).norm(), 1e-300);
        in_active_.assign(static_cast<std::size_t>(m_), 0);
        r_norm_ = 1.0;
    }

    QpResult run(int max_iterations) {
        const double c1 = J_.norm();
        int iter = 0;
        for (Eigen::Index p = 0; p < meq_; ++p) {
            const Eigen::VectorXd np = C_.col(p);
            const Eigen::Index q = static_cast<Eigen::Index>(active_.size());
            const Eigen::VectorXd d = J_.transpose() * np;
            const Eigen::VectorXd z = J_.rightCols(n_ - q) * d.tail(n_ - q);
            Eigen::VectorXd r(q);
            if (q > 0) r = R_.topLeftCorner(q, q).triangularView<Eigen::Upper>().solve(d.head(q));
            const double zn = z.dot(np);
            if (!(z.norm() > 1e-14 * c1 * np.norm()) || !(zn > 0.0)) {
                throw ProjectionFailure("equality constraints are linearly dependent");
            }
            const double t = -(np.dot(x_) - b_[p]) / zn;
            x_ += t * z;
            f_ += 0.5 * t * t * zn;
            for (Eigen::Index k = 0; k < q; ++k) u_[static_cast<std::size_t>(k)] -= t * r[k];
            if (!add(p, d)) throw ProjectionFailure("equality constraints are linearly dependent");
            u_.push_back(t);
        }
        std::vector<char> excluded(static_cast<std::size_t>(m_), 0);
        while (true) {
            if (++iter > max_iterations) {
                throw ProjectionFailure("active-set iteration cap of " + std::to_string(max_iterations) + " reached");
            }
            // Most violated constraint, scaled by its row norm.
            Eigen::Index p = -1;
            double worst = 0.0;
            for (Eigen::Index i = 0; i < m_; ++i) {
                if (in_active_[static_cast<std::size_t>(i)] || excluded[static_cast<std::size_t>(i)]) continue;
                const double s = (C_.col(i).dot(x_) - b_[i]) / norm_[i];
                const double tol = 1e-13 * (1.0 + std::abs(b_[i]) / norm_[i] + x_.lpNorm<Eigen::Infinity>());
                if (s < -tol && s < worst) {
                    worst = s;
                    p = i;
                }
            }
            if (p < 0) break;

            double u_new = 0.0;
            const Eigen::VectorXd np = C_.col(p);
            while (true) {
                const double sp = np.dot(x_) - b_[p];
                const Eigen::Index q = static_cast<Eigen::Index>(active_.size());
                const Eigen::VectorXd d = J_.transpose() * np;
                const Eigen::VectorXd z = J_.rightCols(n_ - q) * d.tail(n_ - q);
                Eigen::VectorXd r(q);
                if (q > 0) r = R_.topLeftCorner(q, q).triangularView<Eigen::Upper>().solve(d.head(q));

                double t1 = kInf;
                Eigen::Index l = -1;
                for (Eigen::Index k = meq_; k < q; ++k) {
                    if (r[k] > 0.0) {
                        const double ratio = u_[static_cast<std::size_t>(k)] / r[k];
                        if (ratio < t1) {
                            t1 = ratio;
                            l = k;
                        }
                    }
                }
                const double zn = z.dot(np);
                double t2 = kInf;
                if (z.norm() > 1e-14 * c1 * np.norm() && zn > 0.0) t2 = -sp / zn;
                const double t = std::min(t1, t2);
                if (!std::isfinite(t)) throw ProjectionFailure("constraints are infeasible");

                if (!std::isfinite(t2)) {
                    for (Eigen::Index k = 0; k < q; ++k) u_[static_cast<std::size_t>(k)] -= t * r[k];
                    u_new += t;
                    drop(l);
                    continue;
                }

                x_ += t * z;
                f_ += t * zn * (0.5 * t + u_new);
                for (Eigen::Index k = 0; k < q; ++k) u_[static_cast<std::size_t>(k)] -= t * r[k];
                u_new += t;

                if (t == t2) {
                    if (!add(p, d)) {
                        // Linearly dependent on the active set; leave it out.
                        excluded[static_cast<std::size_t>(p)] = 1;
                    } else {
                        u_.push_back(u_new);
                    }
                    break;
                }
                drop(l);
            }
        }

        QpResult res;
        res.x = x_;
        res.objective = f_;
        res.iterations = iter;
        for (std::size_t k = 0; k < active_.size(); ++k) {
            res.active.push_back(static_cast<int>(active_[k]));
            res.multipliers.push_back(u_[k]);
        }
        return res;
    }

private:
    bool add(Eigen::Index p, Eigen::VectorXd d) {
        const Eigen::Index q = static_cast<Eigen::Index>(active_.size());
        for (Eigen::Index j = n_ - 1; j > q; --j) {
            double cc = d[j - 1];
            double ss = d[j];
            const double h = std::hypot(cc, ss);
            if (h == 0.0) continue;
            d[j] = 0.0;
            ss /= h;
            cc /= h;
            if (cc < 0.0) {
                cc = -cc;
                ss = -ss;
                d[j - 1] = -h;
            } else {
                d[j - 1] = h;
            }
            const double xny = ss / (1.0 + cc);
            for (Eigen::Index k = 0; k < n_; ++k) {
                const double a1 = J_(k, j - 1);
                const double a2 = J_(k, j);
                J_(k, j - 1) = a1 * cc + a2 * ss;
                J_(k, j) = xny * (a1 + J_(k, j - 1)) - a2;
            }
        }
        if (q >= n_ || std::abs(d[q]) <= 1e-14 * r_norm_) return false;
        R_.col(q).head(q + 1) = d.head(q + 1);
        r_norm_ = std::max(r_norm_, std::abs(d[q]));
        active_.push_back(p);
        in_active_[static_cast<std::size_t>(p)] = 1;
        return true;
    }

    void drop(Eigen::Index l) {
        const Eigen::Index q = static_cast<Eigen::Index>(active_.size());
        in_active_[static_cast<std::size_t>(active_[static_cast<std::size_t>(l)])] = 0;
        for (Eigen::Index k = l; k < q - 1; ++k) {
            active_[static_cast<std::size_t>(k)] = active_[static_cast<std::size_t>(k + 1)];
            u_[static_cast<std::size_t>(k)] = u_[static_cast<std::size_t>(k + 1)];
            R_.col(k) = R_.col(k + 1);
        }
        active_.pop_back();
        u_.pop_back();
        R_.col(q - 1).setZero();
        const Eigen::Index qn = q - 1;
        for (Eigen::Index j = l; j < qn; ++j) {
            double cc = R_(j, j);
            double ss = R_(j + 1, j);
            const double h = std::hypot(cc, ss);
            if (h == 0.0) continue;
            cc /= h;
            ss /= h;
            R_(j + 1, j) = 0.0;
            if (cc < 0.0) {
                R_(j, j) = -h;
                cc = -cc;
                ss = -ss;
            } else {
                R_(j, j) = h;
            }
            const double xny = ss / (1.0 + cc);
            for (Eigen::Index k = j + 1; k < qn; ++k) {
                const double a1 = R_(j, k);
                const double a2 = R_(j + 1, k);
                R_(j, k) = a1 * cc + a2 * ss;
                R_(j + 1, k) = xny * (a1 + R_(j, k)) - a2;
            }
            for (Eigen::Index k = 0; k < n_; ++k) {
                const double a1 = J_(k, j);
                const double a2 = J_(k, j + 1);
                J_(k, j) = a1 * cc + a2 * ss;
                J_(k, j + 1) = xny * (J_(k, j) + a1) - a2;
            }
        }
    }

    const Eigen::MatrixXd& C_;
    const Eigen::VectorXd& b_;
    Eigen::Index n_;
    Eigen::Index m_;
    Eigen::Index meq_;
    Eigen::MatrixXd J_;
    Eigen::MatrixXd R_;
    Eigen::VectorXd x_;
    Eigen::VectorXd norm_;
    double f_ = 0.0;
    double r_norm_ = 1.0;
    std::vector<double> u_;
    std::vector<Eigen::Index> active_;
    std::vector<char> in_active_;
};

} // namespace

QpResult solve_qp(const Eigen::MatrixXd& G, const Eigen::VectorXd& a, const Eigen::MatrixXd& C,
                  const Eigen::VectorXd& b, int n_eq, int max_iterations) {
    if (G.rows() != G.cols() || a.size() != G.rows() || C.rows() != G.rows() || b.size() != C.cols()) {
        throw ProjectionFailure("QP dimensions do not match");
    }
    if (max_iterations <= 0) max_iterations = static_cast<int>(10 * (G.rows() + C.cols())) + 10;
    if (n_eq < 0 || n_eq > C.cols()) throw ProjectionFailure("invalid equality count");
    DualActiveSet solver(G, a, C, b, n_eq);
    return solver.run(max_iterations);
}

} // namespace steklov
