#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "crossmap/errors.hpp"
#include "crossmap/fmbsd.hpp"

namespace crossmap::m2cpc {

/// Stacked +-1 label encoding over all modalities. Each labeled sample owns a
/// c-block with +1 at its class and -1 elsewhere; unlabeled blocks are zero.
/// Samples are reordered labeled-first per modality; `order[i][p]` is the
/// original row of the sample now at position p.
struct LabelEncoding {
    int classes = 0;
    std::vector<Eigen::Index> labeled_counts; // l_i
    std::vector<Eigen::Index> sample_counts;  // N_i
    std::vector<std::vector<Eigen::Index>> order;
    Eigen::VectorXd y; // length c * sum(N_i)
};

/// labels[i][j] is 1..classes, or 0 for unlabeled.
LabelEncoding encode_labels(const std::vector<std::vector<int>>& labels, int classes);

/// Diagonal of the loss mask: 1 on the c-blocks of the first l_i samples of
/// each modality, 0 elsewhere.
Eigen::VectorXd build_J(const std::vector<Eigen::Index>& labeled,
                        const std::vector<Eigen::Index>& counts, int classes);

enum class MpMode { laplacian_exact, paper_verbatim };

/// Between-modality coupling matrix M_P over the stacked samples.
///
/// laplacian_exact (default) builds the Laplacian of the bipartite match
/// graph, so f^T M_P f equals the sum over pairs j<k and rows r of
/// (f^j(r) - f^k(rho(r)))^2 for any correspondences. paper_verbatim keeps
/// (m-1) I diagonal blocks with -P / -P^T off-diagonal blocks, which matches
/// that sum only for bijective correspondences.
Eigen::MatrixXd build_MP(
    const std::map<std::pair<int, int>, fmbsd::CorrespondenceMatrix>& correspondences,
    const std::vector<Eigen::Index>& counts, MpMode mode);

/// Kronecker product m (x) I_c.
Eigen::MatrixXd kron_identity(const Eigen::MatrixXd& m, int c);

/// Within-modality smoothness operator: block-diagonal Laplacians lifted to
/// c outputs per sample.
Eigen::MatrixXd build_MW(const std::vector<Eigen::MatrixXd>& laplacians, int classes);

/// Gaussian kernel settings, one width per modality.
struct KernelSpec {
    std::vector<double> widths;
};

/// exp(-||x_p - x_q||^2 / (2 width^2)) over the rows of x.
Eigen::MatrixXd gaussian_gram(const Eigen::MatrixXd& x, double width);

/// Block Gram operator G = blockdiag(K^i) (x) I_c.
Eigen::MatrixXd gram(const std::vector<Eigen::MatrixXd>& features, const KernelSpec& spec,
                     int classes);

struct TrainedModel {
    Eigen::VectorXd a; // c * N coefficients, in reordered sample order
    std::vector<Eigen::MatrixXd> train_features; // reordered, frozen at fit time
    KernelSpec kernel;
    int classes = 0;
    double gamma_a = 0.0, gamma_w = 0.0, gamma_b = 0.0;
    std::vector<std::vector<Eigen::Index>> order;
    std::vector<Eigen::Index> sample_counts;
};

/// Solves (J G + 2 l gamma_a I + gamma_w (M_W^T + M_W) G / 2
///          + gamma_b (M_B^T + M_B) G / 2) a = y.
/// `features` and `kernel` are frozen into the returned model for prediction;
/// they may be empty when only the coefficients are needed.
TrainedModel fit(const LabelEncoding& encoding, const Eigen::VectorXd& j_diag,
                 const Eigen::MatrixXd& g, const Eigen::MatrixXd& mw,
                 const Eigen::MatrixXd& mb, double gamma_a, double gamma_w, double gamma_b,
                 std::vector<Eigen::MatrixXd> features = {}, KernelSpec kernel = {});

struct Prediction {
    std::vector<int> labels;  // 1..classes per test sample
    Eigen::MatrixXd scores;   // test samples x classes
};

/// Scores test samples of one modality against the frozen training set and
/// assigns the argmax class (ties: lowest class index).
Prediction predict(const TrainedModel& model, const Eigen::MatrixXd& test, int modality);

/// Everything train() needs, in original sample order.
struct TrainInputs {
    std::vector<Eigen::MatrixXd> features;
    std::vector<std::vector<int>> labels; // 0 = unlabeled
    /// rho vectors keyed by modality pair (j, k) with j < k, original order.
    std::map<std::pair<int, int>, Eigen::VectorXi> correspondences;
    int classes = 0;
};

struct TrainParams {
    double gamma_a = 1e-6;
    double gamma_w = 1e-6;
    double gamma_b = 1e-6;
    std::vector<double> widths; // empty -> median-distance heuristic per modality
    MpMode mp_mode = MpMode::laplacian_exact;
    int knn = 5;
};

/// Median-distance Gaussian width for one modality's features.
double median_width(const Eigen::MatrixXd& x);

/// End-to-end training: encodes labels, reorders samples labeled-first,
/// builds neighborhood graphs, operators and the Gram matrix, then fits.
TrainedModel train(const TrainInputs& inputs, const TrainParams& params);

} // namespace crossmap::m2cpc
