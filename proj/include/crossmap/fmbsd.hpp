#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crossmap/errors.hpp"
#include "crossmap/graph_spectral.hpp"
#include "crossmap/sgws.hpp"

namespace crossmap::fmbsd {

/// Spectral coefficients of the signature columns: A = Delta^T S, one column
/// of coefficients per descriptor.
struct FourierCoefficients {
    Eigen::MatrixXd a; // k x q
};

/// Multiplication-by-descriptor operators expressed in the spectral basis:
/// Phi_k = pinv(Delta) diag(s_k) Delta, one per descriptor column.
struct DescriptorOperators {
    std::vector<Eigen::MatrixXd> phi; // q matrices, each k x k
};

/// Hyperparameters of the map-fitting problem and its surrounding pipeline.
struct Config {
    double alpha = 0.1;
    double beta = 1.0;
    double lambda_b = 1e4;
    double lambda_w = 1e4;
    int k_basis = 60;
    int resolution = 60;
    int knn = 5;
    int max_iters = 500;
    double grad_tol = 1e-6;
    sgws::SimilarityBandwidth sigma_mode = sgws::SimilarityBandwidth::std_dev;
    graph::LaplacianFlavor smoothness_flavor = graph::LaplacianFlavor::combinatorial;
};

/// Fitted spectral-coefficient map between two modalities.
struct FunctionalMap {
    Eigen::MatrixXd c; // k_i x k_j
    std::string source;
    std::string target;
    double objective = 0.0;
    int iterations = 0;
    std::vector<double> objective_history; // initial value plus one per accepted step
};

/// Row/column sums of a similarity matrix, used as the diagonal weights of
/// the between-modality alignment term.
struct SimilarityRowSums {
    Eigen::VectorXd row_sums; // length N_i
    Eigen::VectorXd col_sums; // length N_j
};

SimilarityRowSums similarity_row_sums(const Eigen::MatrixXd& pi);

/// Dense row-wise correspondence: row r of the source maps to column rho(r)
/// of the target. Columns may be hit zero or many times.
struct CorrespondenceMatrix {
    Eigen::VectorXi rho;       // length N_i, values in [0, N_j)
    Eigen::Index target_count = 0;

    Eigen::Index source_count() const { return rho.size(); }
    /// 0/1 matrix view with exactly one 1 per row, at column rho(r).
    Eigen::MatrixXd dense() const;
};

/// Everything Algorithm-1 step 1 produces for one modality.
struct ModalityBundle {
    std::string id;
    graph::SpectralBasis basis;            // normalized-Laplacian basis Delta
    sgws::SignatureMatrix signatures;      // S
    FourierCoefficients coefficients;      // A
    DescriptorOperators operators;         // Phi_k
    Eigen::MatrixXd smoothness;            // Laplacian used in the within term
};

/// Per-modality spectral scaffolding computed before the wavelet kernels are
/// fixed (the kernel spec is shared across modalities, so it can only be
/// chosen once every spectrum is known).
struct SpectralScaffold {
    graph::NeighborGraph neighbor_graph;
    graph::Laplacian normalized;
    graph::Laplacian smoothness;
    graph::SpectralBasis basis;
};

SpectralScaffold build_scaffold(const graph::FeatureMatrix& x, const Config& cfg);

/// A wavelet kernel spec valid for all modalities: scales span the union of
/// the computed spectra.
sgws::WaveletKernelSpec shared_wavelet_spec(const std::vector<SpectralScaffold>& scaffolds,
                                            int resolution);

ModalityBundle finish_bundle(const std::string& id, const SpectralScaffold& scaffold,
                             const sgws::WaveletKernelSpec& spec);

/// A = Delta^T S.
FourierCoefficients project_descriptors(const graph::SpectralBasis& basis,
                                        const sgws::SignatureMatrix& s);

/// Phi_k = pinv(Delta) diag(s_k) Delta for every descriptor column.
DescriptorOperators descriptor_operators(const graph::SpectralBasis& basis,
                                         const sgws::SignatureMatrix& s);

/// Four-term map-fitting objective:
///   alpha ||C^T A_i - A_j||_F^2
/// + beta  sum_k ||Phi_k^i C - C Phi_k^j||_F^2
/// + lambda_b tr(C^T D_i^T Dpi D_i C - 2 C^T D_i^T Pi D_j + D_j^T Dpi~ D_j)
/// + lambda_w tr(C^T D_i^T L_i D_i C)
/// where D_i, D_j are the spectral bases and Dpi/Dpi~ the similarity
/// row/column sums.
double objective(const Eigen::MatrixXd& c, const Eigen::MatrixXd& a_i,
                 const Eigen::MatrixXd& a_j, const std::vector<Eigen::MatrixXd>& phi_i,
                 const std::vector<Eigen::MatrixXd>& phi_j, const Eigen::MatrixXd& pi,
                 const Eigen::MatrixXd& delta_i, const Eigen::MatrixXd& delta_j,
                 const Eigen::MatrixXd& l_i, const Config& cfg);

/// Analytic gradient of the objective with respect to C.
Eigen::MatrixXd gradient(const Eigen::MatrixXd& c, const Eigen::MatrixXd& a_i,
                         const Eigen::MatrixXd& a_j, const std::vector<Eigen::MatrixXd>& phi_i,
                         const std::vector<Eigen::MatrixXd>& phi_j, const Eigen::MatrixXd& pi,
                         const Eigen::MatrixXd& delta_i, const Eigen::MatrixXd& delta_j,
                         const Eigen::MatrixXd& l_i, const Config& cfg);

/// Minimizes the objective by gradient descent with backtracking line search
/// from the rectangular-identity start. Terminates when the gradient
/// Frobenius norm drops below cfg.grad_tol or cfg.max_iters is reached; the
/// objective is non-increasing across accepted steps.
FunctionalMap fit_map(const ModalityBundle& source, const ModalityBundle& target,
                      const Eigen::MatrixXd& pi, const Config& cfg);

/// Nearest-row assignment of the aligned embedding Delta_i C into Delta_j.
CorrespondenceMatrix extract_correspondences(const Eigen::MatrixXd& delta_i,
                                             const Eigen::MatrixXd& c,
                                             const Eigen::MatrixXd& delta_j);

/// The k_ret rows of Delta_j nearest to row `row` of Delta_i C, ascending by
/// distance (ties: lowest index).
std::vector<Eigen::Index> retrieve(const Eigen::MatrixXd& delta_i, const Eigen::MatrixXd& c,
                                   const Eigen::MatrixXd& delta_j, Eigen::Index row,
                                   Eigen::Index k_ret);

} // namespace crossmap::fmbsd
