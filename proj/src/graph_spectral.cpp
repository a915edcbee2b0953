#include "crossmap/graph_spectral.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "crossmap/kernels.hpp"

namespace crossmap::graph {

NeighborGraph build_knn_graph(const FeatureMatrix& x, int k) {
    const Eigen::Index n = x.samples();
    if (n < 2 || x.dimension() < 1) {
        throw ArgumentError("build_knn_graph: need at least 2 samples and 1 dimension");
    }
    if (!x.data.allFinite()) {
        throw ArgumentError("build_knn_graph: features must be finite");
    }
    if (k < 1 || k >= n) {
        throw ArgumentError("build_knn_graph: k must satisfy 1 <= k < N");
    }

    const Eigen::MatrixXd d2 = kernels::pairwise_sq_dists(x.data, x.data);

    // k nearest per sample, ties broken by lowest index; self excluded.
    std::vector<std::vector<Eigen::Index>> neighbors(static_cast<std::size_t>(n));
    double sigma_sum = 0.0;
    std::vector<std::pair<double, Eigen::Index>> cand;
    cand.reserve(static_cast<std::size_t>(n - 1));
    for (Eigen::Index r = 0; r < n; ++r) {
        cand.clear();
        for (Eigen::Index t = 0; t < n; ++t) {
            if (t != r) cand.emplace_back(d2(r, t), t);
        }
        std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
        auto& list = neighbors[static_cast<std::size_t>(r)];
        list.reserve(static_cast<std::size_t>(k));
        double mean_dist = 0.0;
        for (int i = 0; i < k; ++i) {
            list.push_back(cand[static_cast<std::size_t>(i)].second);
            mean_dist += std::sqrt(cand[static_cast<std::size_t>(i)].first);
        }
        sigma_sum += mean_dist / k;
    }
    const double sigma = sigma_sum / static_cast<double>(n);
    const double denom = 2.0 * sigma * sigma;

    NeighborGraph g;
    g.k = k;
    g.sigma = sigma;
    g.weights = Eigen::MatrixXd::Zero(n, n);
    std::vector<char> is_neighbor(static_cast<std::size_t>(n * n), 0);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index t : neighbors[static_cast<std::size_t>(r)]) {
            is_neighbor[static_cast<std::size_t>(r * n + t)] = 1;
        }
    }
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index t = r + 1; t < n; ++t) {
            if (is_neighbor[static_cast<std::size_t>(r * n + t)] ||
                is_neighbor[static_cast<std::size_t>(t * n + r)]) {
                const double z = d2(r, t);
                double w;
                if (z == 0.0) {
                    w = 1.0;
                } else if (denom > 0.0) {
                    w = std::exp(-z / denom);
                } else {
                    w = 0.0;
                }
                g.weights(r, t) = w;
                g.weights(t, r) = w;
            }
        }
    }
    return g;
}

Laplacian laplacian(const NeighborGraph& g, LaplacianFlavor flavor) {
    const Eigen::Index n = g.weights.rows();
    if (n < 1 || g.weights.cols() != n) {
        throw ArgumentError("laplacian: weight matrix must be square");
    }
    Laplacian out;
    out.flavor = flavor;
    out.degrees = g.weights.rowwise().sum();
    for (Eigen::Index r = 0; r < n; ++r) {
        if (!(out.degrees(r) > 0.0)) {
            throw DegenerateGraphError("laplacian: vertex " + std::to_string(r) +
                                       " has zero degree");
        }
    }
    if (flavor == LaplacianFlavor::combinatorial) {
        out.matrix = Eigen::MatrixXd(out.degrees.asDiagonal()) - g.weights;
    } else {
        const Eigen::VectorXd inv_sqrt = out.degrees.array().rsqrt();
        Eigen::MatrixXd l = Eigen::MatrixXd::Identity(n, n) -
                            inv_sqrt.asDiagonal() * g.weights * inv_sqrt.asDiagonal();
        out.matrix = 0.5 * (l + l.transpose()); // scrub roundoff asymmetry
    }
    return out;
}

SpectralBasis spectral_basis(const Laplacian& l, Eigen::Index k) {
    const numkit::EigenPairs pairs = numkit::sym_eig_smallest(l.matrix, k);
    SpectralBasis basis;
    basis.eigenvalues = pairs.eigenvalues;
    basis.basis = pairs.eigenvectors;
    basis.flavor = l.flavor;
    return basis;
}

} // namespace crossmap::graph
