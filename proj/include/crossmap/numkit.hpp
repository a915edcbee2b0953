#pragma once

#include <vector>

#include <Eigen/Dense>

#include "crossmap/errors.hpp"

namespace crossmap::numkit {

/// Eigenpairs of a symmetric matrix, eigenvalues ascending.
///
/// Columns of `eigenvectors` are orthonormal and sign-fixed: in each column
/// the entry of largest magnitude is positive (ties broken by lowest row
/// index), so repeated decompositions of permuted inputs stay comparable.
struct EigenPairs {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;
};

/// Flips eigenvector columns in place so the largest-magnitude entry of each
/// column is positive (ties: lowest row index wins).
void fix_column_signs(Eigen::MatrixXd& columns);

/// The k smallest eigenpairs of a symmetric matrix.
///
/// Throws SymmetryError when m deviates from its transpose beyond 1e-10,
/// ArgumentError when k is out of range.
EigenPairs sym_eig_smallest(const Eigen::MatrixXd& m, Eigen::Index k);

/// Moore-Penrose pseudoinverse via SVD. Singular values below
/// 1e-12 * sigma_max are treated as zero.
Eigen::MatrixXd pinv(const Eigen::MatrixXd& m);

/// Solves the square system a x = y by LU factorization.
/// Throws SingularSystemError when the reciprocal condition estimate
/// falls below 1e-14.
Eigen::VectorXd solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& y);

/// Exact k-d tree over the rows of a point matrix.
///
/// Queries return the same result set as an exhaustive scan ordered by
/// (distance, index), so ties always resolve to the lowest row index.
/// Immutable after construction and safe for concurrent queries.
class NeighborIndex {
public:
    explicit NeighborIndex(Eigen::MatrixXd points);

    Eigen::Index size() const { return points_.rows(); }
    Eigen::Index dim() const { return points_.cols(); }
    const Eigen::MatrixXd& points() const { return points_; }

    /// Indices of the k nearest rows to p, ascending by (distance, index).
    std::vector<Eigen::Index> query(const Eigen::Ref<const Eigen::VectorXd>& p,
                                    Eigen::Index k) const;

private:
    struct Node {
        Eigen::Index point = -1;
        int axis = 0;
        Eigen::Index left = -1;
        Eigen::Index right = -1;
    };

    Eigen::Index build(std::vector<Eigen::Index>& order, Eigen::Index lo,
                       Eigen::Index hi, int depth);

    Eigen::MatrixXd points_;
    std::vector<Node> nodes_;
    Eigen::Index root_ = -1;
};

} // namespace crossmap::numkit
