#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crossmap/errors.hpp"
#include "crossmap/graph_spectral.hpp"

namespace crossmap::sgws {

/// Band-pass generating kernel g, low-pass scaling kernel h and the wavelet
/// scales they are evaluated at. g(0) = 0 and g, h -> 0 at infinity; scales
/// are strictly positive and descending.
struct WaveletKernelSpec {
    std::function<double(double)> g;
    std::function<double(double)> h;
    int resolution = 0;          // R
    std::vector<double> scales;  // length R, descending
};

/// Per-vertex wavelet signature matrix, N x (R+1): columns 1..R hold wavelet
/// coefficients at the spec's scales, the last column holds the scaling
/// coefficients.
struct SignatureMatrix {
    std::string modality;
    Eigen::MatrixXd s;
    int resolution = 0;

    Eigen::Index descriptor_count() const { return s.cols(); } // q = R+1
};

enum class SimilarityBandwidth { std_dev, variance };

/// Cross-modal signature similarity matrix with entries in (0, 1].
struct CrossSimilarity {
    Eigen::MatrixXd pi;
    double bandwidth = 0.0; // sigma used inside the Gaussian
};

/// Default kernels: g(x) = x e^{-x}, h(x) = e^{-1} exp(-(x / (0.6 l_min))^4),
/// scales log-spaced descending from 2/lambda_min_nz to 2/lambda_max.
WaveletKernelSpec default_kernels(double lambda_max, double lambda_min_nz, int resolution);

/// Signature matrix from a normalized-Laplacian spectral basis: entry (r, m)
/// for m <= R is sum_l g(eta_m lambda_l) u_l(r)^2, the last column is
/// sum_l h(lambda_l) u_l(r)^2, both truncated to the basis's eigenpairs.
SignatureMatrix sgws_matrix(const graph::SpectralBasis& basis, const WaveletKernelSpec& spec);

/// Squared Euclidean distance between two signature rows.
double sgws_distance(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                     const Eigen::Ref<const Eigen::RowVectorXd>& b);

/// Similarity pi(r, t) = exp(-d(r,t)^2 / (2 sigma^2)) where d is the
/// signature distance and sigma is the standard deviation (or, per mode, the
/// variance) of all N_i * N_j pairwise distances. Throws
/// DegenerateSimilarityError when every distance coincides.
CrossSimilarity cross_similarity(const SignatureMatrix& si, const SignatureMatrix& sj,
                                 SimilarityBandwidth mode = SimilarityBandwidth::std_dev);

} // namespace crossmap::sgws
