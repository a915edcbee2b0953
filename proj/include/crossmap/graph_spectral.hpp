#pragma once

#include <string>

#include <Eigen/Dense>

#include "crossmap/errors.hpp"
#include "crossmap/numkit.hpp"

namespace crossmap::graph {

/// One modality's samples: N rows of d-dimensional features.
struct FeatureMatrix {
    std::string id;
    Eigen::MatrixXd data;

    Eigen::Index samples() const { return data.rows(); }
    Eigen::Index dimension() const { return data.cols(); }
};

/// Symmetric weighted k-nearest-neighbor graph. W has zero diagonal and
/// entries in [0, 1]; an edge (r, t) exists when r is among t's k nearest
/// neighbors or vice versa.
struct NeighborGraph {
    Eigen::MatrixXd weights;
    int k = 0;
    double sigma = 0.0;
};

enum class LaplacianFlavor { normalized, combinatorial };

struct Laplacian {
    Eigen::MatrixXd matrix;
    LaplacianFlavor flavor = LaplacianFlavor::normalized;
    Eigen::VectorXd degrees;
};

/// Truncated spectral basis: the k smallest eigenpairs of a Laplacian, with
/// orthonormal sign-fixed columns.
struct SpectralBasis {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd basis;
    LaplacianFlavor flavor = LaplacianFlavor::normalized;
};

/// Gaussian-weighted kNN graph. The width sigma is set globally to the mean
/// over samples of the mean Euclidean distance to their k nearest neighbors;
/// a zero distance always yields weight 1.
NeighborGraph build_knn_graph(const FeatureMatrix& x, int k);

/// Graph Laplacian of the requested flavor. Every vertex must have positive
/// degree; throws DegenerateGraphError otherwise.
Laplacian laplacian(const NeighborGraph& g, LaplacianFlavor flavor);

/// k smallest eigenpairs of a Laplacian.
SpectralBasis spectral_basis(const Laplacian& l, Eigen::Index k);

} // namespace crossmap::graph
