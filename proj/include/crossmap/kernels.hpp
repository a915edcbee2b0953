#pragma once

#include <vector>

#include <Eigen/Dense>

#include "crossmap/numkit.hpp"

namespace crossmap::kernels {

/// Data-parallel inner loops shared by the graph, similarity, map-fitting and
/// correspondence stages. Each kernel has an OpenMP-parallel implementation
/// (the default entry points below) and a serial reference in
/// kernels::serial. Both compute every output entry with identical
/// arithmetic, so results are bitwise equal regardless of thread count;
/// reductions accumulate per-slot results in a fixed order.

/// Squared Euclidean distances between all rows of a and all rows of b.
Eigen::MatrixXd pairwise_sq_dists(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Gaussian affinity exp(-d2 / denom) applied entrywise to a squared-distance
/// matrix. Zero distances map to exactly 1 even when denom is zero.
Eigen::MatrixXd gaussian_affinity(const Eigen::MatrixXd& sq_dists, double denom);

/// Sum over paired operator slots of ||P[k] C - C Q[k]||_F^2.
double commutator_penalty(const std::vector<Eigen::MatrixXd>& p,
                          const std::vector<Eigen::MatrixXd>& q,
                          const Eigen::MatrixXd& c);

/// Gradient of commutator_penalty with respect to C, without the leading 2.
Eigen::MatrixXd commutator_penalty_gradient(const std::vector<Eigen::MatrixXd>& p,
                                            const std::vector<Eigen::MatrixXd>& q,
                                            const Eigen::MatrixXd& c);

/// For every row of queries, the index of its nearest row in the index
/// (ties resolve to the lowest index).
Eigen::VectorXi nearest_rows(const Eigen::MatrixXd& queries,
                             const numkit::NeighborIndex& index);

namespace serial {

Eigen::MatrixXd pairwise_sq_dists(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
Eigen::MatrixXd gaussian_affinity(const Eigen::MatrixXd& sq_dists, double denom);
double commutator_penalty(const std::vector<Eigen::MatrixXd>& p,
                          const std::vector<Eigen::MatrixXd>& q,
                          const Eigen::MatrixXd& c);
Eigen::MatrixXd commutator_penalty_gradient(const std::vector<Eigen::MatrixXd>& p,
                                            const std::vector<Eigen::MatrixXd>& q,
                                            const Eigen::MatrixXd& c);
Eigen::VectorXi nearest_rows(const Eigen::MatrixXd& queries,
                             const numkit::NeighborIndex& index);

} // namespace serial

} // namespace crossmap::kernels
