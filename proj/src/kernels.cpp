#include "crossmap/kernels.hpp"

#include <cmath>

#include "crossmap/errors.hpp"

namespace crossmap::kernels {

namespace {

void check_pairwise(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.cols() != b.cols()) {
        throw ArgumentError("pairwise_sq_dists: column dimensions differ");
    }
}

void check_commutator(const std::vector<Eigen::MatrixXd>& p,
                      const std::vector<Eigen::MatrixXd>& q,
                      const Eigen::MatrixXd& c) {
    if (p.size() != q.size()) {
        throw ArgumentError("commutator: operator slot counts differ");
    }
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k].rows() != c.rows() || p[k].cols() != c.rows() ||
            q[k].rows() != c.cols() || q[k].cols() != c.cols()) {
            throw ArgumentError("commutator: operator shape mismatch at slot " +
                                std::to_string(k));
        }
    }
}

inline double affinity_entry(double d2, double denom) {
    if (d2 == 0.0) return 1.0;
    if (denom <= 0.0) return 0.0;
    return std::exp(-d2 / denom);
}

} // namespace

Eigen::MatrixXd pairwise_sq_dists(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    check_pairwise(a, b);
    Eigen::MatrixXd out(a.rows(), b.rows());
#pragma omp parallel for schedule(static)
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index t = 0; t < b.rows(); ++t) {
            out(r, t) = (a.row(r) - b.row(t)).squaredNorm();
        }
    }
    return out;
}

Eigen::MatrixXd gaussian_affinity(const Eigen::MatrixXd& sq_dists, double denom) {
    Eigen::MatrixXd out(sq_dists.rows(), sq_dists.cols());
#pragma omp parallel for schedule(static)
    for (Eigen::Index r = 0; r < sq_dists.rows(); ++r) {
        for (Eigen::Index t = 0; t < sq_dists.cols(); ++t) {
            out(r, t) = affinity_entry(sq_dists(r, t), denom);
        }
    }
    return out;
}

double commutator_penalty(const std::vector<Eigen::MatrixXd>& p,
                          const std::vector<Eigen::MatrixXd>& q,
                          const Eigen::MatrixXd& c) {
    check_commutator(p, q, c);
    const Eigen::Index n = static_cast<Eigen::Index>(p.size());
    std::vector<double> slot(static_cast<std::size_t>(n), 0.0);
#pragma omp parallel for schedule(static)
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::MatrixXd r = p[static_cast<std::size_t>(k)] * c -
                                  c * q[static_cast<std::size_t>(k)];
        slot[static_cast<std::size_t>(k)] = r.squaredNorm();
    }
    double total = 0.0;
    for (double v : slot) total += v; // fixed order keeps the sum reproducible
    return total;
}

Eigen::MatrixXd commutator_penalty_gradient(const std::vector<Eigen::MatrixXd>& p,
                                            const std::vector<Eigen::MatrixXd>& q,
                                            const Eigen::MatrixXd& c) {
    check_commutator(p, q, c);
    const Eigen::Index n = static_cast<Eigen::Index>(p.size());
    std::vector<Eigen::MatrixXd> slot(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
    for (Eigen::Index k = 0; k < n; ++k) {
        const std::size_t i = static_cast<std::size_t>(k);
        const Eigen::MatrixXd r = p[i] * c - c * q[i];
        slot[i] = p[i].transpose() * r - r * q[i].transpose();
    }
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(c.rows(), c.cols());
    for (const Eigen::MatrixXd& g : slot) grad += g;
    return grad;
}

Eigen::VectorXi nearest_rows(const Eigen::MatrixXd& queries,
                             const numkit::NeighborIndex& index) {
    if (queries.cols() != index.dim()) {
        throw ArgumentError("nearest_rows: dimension mismatch");
    }
    Eigen::VectorXi out(queries.rows());
#pragma omp parallel for schedule(static)
    for (Eigen::Index r = 0; r < queries.rows(); ++r) {
        out(r) = static_cast<int>(index.query(queries.row(r).transpose(), 1)[0]);
    }
    return out;
}

namespace serial {

Eigen::MatrixXd pairwise_sq_dists(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    check_pairwise(a, b);
    Eigen::MatrixXd out(a.rows(), b.rows());
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index t = 0; t < b.rows(); ++t) {
            out(r, t) = (a.row(r) - b.row(t)).squaredNorm();
        }
    }
    return out;
}

Eigen::MatrixXd gaussian_affinity(const Eigen::MatrixXd& sq_dists, double denom) {
    Eigen::MatrixXd out(sq_dists.rows(), sq_dists.cols());
    for (Eigen::Index r = 0; r < sq_dists.rows(); ++r) {
        for (Eigen::Index t = 0; t < sq_dists.cols(); ++t) {
            out(r, t) = affinity_entry(sq_dists(r, t), denom);
        }
    }
    return out;
}

double commutator_penalty(const std::vector<Eigen::MatrixXd>& p,
                          const std::vector<Eigen::MatrixXd>& q,
                          const Eigen::MatrixXd& c) {
    check_commutator(p, q, c);
    double total = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const Eigen::MatrixXd r = p[k] * c - c * q[k];
        total += r.squaredNorm();
    }
    return total;
}

Eigen::MatrixXd commutator_penalty_gradient(const std::vector<Eigen::MatrixXd>& p,
                                            const std::vector<Eigen::MatrixXd>& q,
                                            const Eigen::MatrixXd& c) {
    check_commutator(p, q, c);
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(c.rows(), c.cols());
    for (std::size_t k = 0; k < p.size(); ++k) {
        const Eigen::MatrixXd r = p[k] * c - c * q[k];
        grad += p[k].transpose() * r - r * q[k].transpose();
    }
    return grad;
}

Eigen::VectorXi nearest_rows(const Eigen::MatrixXd& queries,
                             const numkit::NeighborIndex& index) {
    if (queries.cols() != index.dim()) {
        throw ArgumentError("nearest_rows: dimension mismatch");
    }
    Eigen::VectorXi out(queries.rows());
    for (Eigen::Index r = 0; r < queries.rows(); ++r) {
        out(r) = static_cast<int>(index.query(queries.row(r).transpose(), 1)[0]);
    }
    return out;
}

} // namespace serial

} // namespace crossmap::kernels
