#include "crossmap/fmbsd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crossmap/kernels.hpp"

namespace crossmap::fmbsd {

namespace {

void check_objective_shapes(const Eigen::MatrixXd& c, const Eigen::MatrixXd& a_i,
                            const Eigen::MatrixXd& a_j,
                            const std::vector<Eigen::MatrixXd>& phi_i,
                            const std::vector<Eigen::MatrixXd>& phi_j,
                            const Eigen::MatrixXd& pi, const Eigen::MatrixXd& delta_i,
                            const Eigen::MatrixXd& delta_j, const Eigen::MatrixXd& l_i) {
    const Eigen::Index ki = c.rows(), kj = c.cols();
    if (a_i.rows() != ki || a_j.rows() != kj || a_i.cols() != a_j.cols()) {
        throw ArgumentError("objective: coefficient shapes do not conform with C");
    }
    if (phi_i.size() != phi_j.size()) {
        throw ArgumentError("objective: operator counts differ");
    }
    if (delta_i.cols() != ki || delta_j.cols() != kj) {
        throw ArgumentError("objective: basis widths do not conform with C");
    }
    if (pi.rows() != delta_i.rows() || pi.cols() != delta_j.rows()) {
        throw ArgumentError("objective: similarity shape does not conform with bases");
    }
    if (l_i.rows() != delta_i.rows() || l_i.cols() != delta_i.rows()) {
        throw ArgumentError("objective: Laplacian shape does not conform with source basis");
    }
}

/// Quadratic reformulation with everything independent of C precomputed.
struct QuadraticModel {
    double alpha, beta, lambda_b, lambda_w;
    Eigen::MatrixXd p1;   // A_i A_i^T
    Eigen::MatrixXd p2;   // A_i A_j^T
    double aj_norm2;      // ||A_j||_F^2
    Eigen::MatrixXd eb;   // Delta_i^T Dpi Delta_i
    Eigen::MatrixXd fb;   // Delta_i^T Pi Delta_j
    double cb;            // tr(Delta_j^T Dpi~ Delta_j)
    Eigen::MatrixXd ew;   // Delta_i^T L_i Delta_i
    const std::vector<Eigen::MatrixXd>* phi_i;
    const std::vector<Eigen::MatrixXd>* phi_j;

    double value(const Eigen::MatrixXd& c) const {
        double v = alpha * ((p1 * c).cwiseProduct(c).sum() - 2.0 * p2.cwiseProduct(c).sum() +
                            aj_norm2);
        if (beta != 0.0) v += beta * kernels::commutator_penalty(*phi_i, *phi_j, c);
        v += lambda_b *
             ((eb * c).cwiseProduct(c).sum() - 2.0 * fb.cwiseProduct(c).sum() + cb);
        v += lambda_w * (ew * c).cwiseProduct(c).sum();
        return v;
    }

    Eigen::MatrixXd grad(const Eigen::MatrixXd& c) const {
        Eigen::MatrixXd g = 2.0 * alpha * (p1 * c - p2);
        if (beta != 0.0) {
            g += 2.0 * beta * kernels::commutator_penalty_gradient(*phi_i, *phi_j, c);
        }
        g += 2.0 * lambda_b * (eb * c - fb);
        g += 2.0 * lambda_w * (ew * c);
        return g;
    }
};

QuadraticModel make_model(const Eigen::MatrixXd& a_i, const Eigen::MatrixXd& a_j,
                          const std::vector<Eigen::MatrixXd>& phi_i,
                          const std::vector<Eigen::MatrixXd>& phi_j,
                          const Eigen::MatrixXd& pi, const Eigen::MatrixXd& delta_i,
                          const Eigen::MatrixXd& delta_j, const Eigen::MatrixXd& l_i,
                          const Config& cfg) {
    QuadraticModel m;
    m.alpha = cfg.alpha;
    m.beta = cfg.beta;
    m.lambda_b = cfg.lambda_b;
    m.lambda_w = cfg.lambda_w;
    m.p1 = a_i * a_i.transpose();
    m.p2 = a_i * a_j.transpose();
    m.aj_norm2 = a_j.squaredNorm();
    const SimilarityRowSums sums = similarity_row_sums(pi);
    m.eb = delta_i.transpose() * sums.row_sums.asDiagonal() * delta_i;
    m.fb = delta_i.transpose() * pi * delta_j;
    m.cb = (delta_j.transpose() * sums.col_sums.asDiagonal() * delta_j).trace();
    m.ew = delta_i.transpose() * l_i * delta_i;
    m.phi_i = &phi_i;
    m.phi_j = &phi_j;
    return m;
}

} // namespace

SimilarityRowSums similarity_row_sums(const Eigen::MatrixXd& pi) {
    SimilarityRowSums sums;
    sums.row_sums = pi.rowwise().sum();
    sums.col_sums = pi.colwise().sum().transpose();
    return sums;
}

Eigen::MatrixXd CorrespondenceMatrix::dense() const {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(rho.size(), target_count);
    for (Eigen::Index r = 0; r < rho.size(); ++r) {
        p(r, rho(r)) = 1.0;
    }
    return p;
}

SpectralScaffold build_scaffold(const graph::FeatureMatrix& x, const Config& cfg) {
    SpectralScaffold s;
    s.neighbor_graph = graph::build_knn_graph(x, cfg.knn);
    s.normalized = graph::laplacian(s.neighbor_graph, graph::LaplacianFlavor::normalized);
    s.smoothness = cfg.smoothness_flavor == graph::LaplacianFlavor::normalized
                       ? s.normalized
                       : graph::laplacian(s.neighbor_graph, cfg.smoothness_flavor);
    const Eigen::Index k =
        std::min<Eigen::Index>(cfg.k_basis, s.normalized.matrix.rows());
    s.basis = graph::spectral_basis(s.normalized, k);
    return s;
}

sgws::WaveletKernelSpec shared_wavelet_spec(const std::vector<SpectralScaffold>& scaffolds,
                                            int resolution) {
    if (scaffolds.empty()) {
        throw ArgumentError("shared_wavelet_spec: no modalities");
    }
    double lambda_max = 0.0;
    double lambda_min_nz = std::numeric_limits<double>::infinity();
    for (const SpectralScaffold& s : scaffolds) {
        lambda_max = std::max(lambda_max, s.basis.eigenvalues.maxCoeff());
        double local = std::numeric_limits<double>::infinity();
        for (Eigen::Index l = 0; l < s.basis.eigenvalues.size(); ++l) {
            const double v = s.basis.eigenvalues(l);
            if (v > 1e-8) {
                local = v;
                break;
            }
        }
        lambda_min_nz = std::min(lambda_min_nz, local);
    }
    if (!std::isfinite(lambda_min_nz)) {
        throw ArgumentError("shared_wavelet_spec: no modality has a nonzero eigenvalue");
    }
    return sgws::default_kernels(lambda_max, lambda_min_nz, resolution);
}

ModalityBundle finish_bundle(const std::string& id, const SpectralScaffold& scaffold,
                             const sgws::WaveletKernelSpec& spec) {
    ModalityBundle b;
    b.id = id;
    b.basis = scaffold.basis;
    b.signatures = sgws::sgws_matrix(scaffold.basis, spec);
    b.signatures.modality = id;
    b.coefficients = project_descriptors(b.basis, b.signatures);
    b.operators = descriptor_operators(b.basis, b.signatures);
    b.smoothness = scaffold.smoothness.matrix;
    return b;
}

FourierCoefficients project_descriptors(const graph::SpectralBasis& basis,
                                        const sgws::SignatureMatrix& s) {
    if (basis.basis.rows() != s.s.rows()) {
        throw ArgumentError("project_descriptors: basis and signatures disagree on N");
    }
    return FourierCoefficients{basis.basis.transpose() * s.s};
}

DescriptorOperators descriptor_operators(const graph::SpectralBasis& basis,
                                         const sgws::SignatureMatrix& s) {
    if (basis.basis.rows() != s.s.rows()) {
        throw ArgumentError("descriptor_operators: basis and signatures disagree on N");
    }
    const Eigen::MatrixXd pseudo = numkit::pinv(basis.basis);
    DescriptorOperators ops;
    ops.phi.reserve(static_cast<std::size_t>(s.s.cols()));
    for (Eigen::Index k = 0; k < s.s.cols(); ++k) {
        ops.phi.push_back(pseudo * (s.s.col(k).asDiagonal() * basis.basis));
    }
    return ops;
}

double objective(const Eigen::MatrixXd& c, const Eigen::MatrixXd& a_i,
                 const Eigen::MatrixXd& a_j, const std::vector<Eigen::MatrixXd>& phi_i,
                 const std::vector<Eigen::MatrixXd>& phi_j, const Eigen::MatrixXd& pi,
                 const Eigen::MatrixXd& delta_i, const Eigen::MatrixXd& delta_j,
                 const Eigen::MatrixXd& l_i, const Config& cfg) {
    check_objective_shapes(c, a_i, a_j, phi_i, phi_j, pi, delta_i, delta_j, l_i);
    const QuadraticModel m =
        make_model(a_i, a_j, phi_i, phi_j, pi, delta_i, delta_j, l_i, cfg);
    return m.value(c);
}

Eigen::MatrixXd gradient(const Eigen::MatrixXd& c, const Eigen::MatrixXd& a_i,
                         const Eigen::MatrixXd& a_j, const std::vector<Eigen::MatrixXd>& phi_i,
                         const std::vector<Eigen::MatrixXd>& phi_j, const Eigen::MatrixXd& pi,
                         const Eigen::MatrixXd& delta_i, const Eigen::MatrixXd& delta_j,
                         const Eigen::MatrixXd& l_i, const Config& cfg) {
    check_objective_shapes(c, a_i, a_j, phi_i, phi_j, pi, delta_i, delta_j, l_i);
    const QuadraticModel m =
        make_model(a_i, a_j, phi_i, phi_j, pi, delta_i, delta_j, l_i, cfg);
    return m.grad(c);
}

FunctionalMap fit_map(const ModalityBundle& source, const ModalityBundle& target,
                      const Eigen::MatrixXd& pi, const Config& cfg) {
    const Eigen::Index ki = source.basis.basis.cols();
    const Eigen::Index kj = target.basis.basis.cols();
    Eigen::MatrixXd c = Eigen::MatrixXd::Identity(ki, kj);
    check_objective_shapes(c, source.coefficients.a, target.coefficients.a,
                           source.operators.phi, target.operators.phi, pi,
                           source.basis.basis, target.basis.basis, source.smoothness);
    const QuadraticModel m = make_model(
        source.coefficients.a, target.coefficients.a, source.operators.phi,
        target.operators.phi, pi, source.basis.basis, target.basis.basis,
        source.smoothness, cfg);

    constexpr double armijo = 1e-4;
    constexpr double min_step = 1e-20;
    double f = m.value(c);
    if (!std::isfinite(f)) {
        throw DivergenceError("fit_map: objective non-finite at the start");
    }

    double step = 1.0;
    int accepted = 0;
    std::vector<double> history{f};
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        const Eigen::MatrixXd g = m.grad(c);
        const double gn2 = g.squaredNorm();
        if (std::sqrt(gn2) <= cfg.grad_tol) break;

        bool moved = false;
        while (step >= min_step) {
            const Eigen::MatrixXd cand = c - step * g;
            const double fc = m.value(cand);
            if (!std::isfinite(fc)) {
                throw DivergenceError("fit_map: objective non-finite during line search");
            }
            if (fc <= f - armijo * step * gn2) {
                c = cand;
                f = fc;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break; // no decrease representable at this scale
        ++accepted;
        history.push_back(f);
        step *= 2.0;
    }

    FunctionalMap map;
    map.c = std::move(c);
    map.source = source.id;
    map.target = target.id;
    map.iterations = accepted;
    map.objective = m.value(map.c);
    map.objective_history = std::move(history);
    return map;
}

CorrespondenceMatrix extract_correspondences(const Eigen::MatrixXd& delta_i,
                                             const Eigen::MatrixXd& c,
                                             const Eigen::MatrixXd& delta_j) {
    if (delta_i.cols() != c.rows() || delta_j.cols() != c.cols()) {
        throw ArgumentError("extract_correspondences: shapes do not conform");
    }
    if (delta_j.rows() < 1) {
        throw ArgumentError("extract_correspondences: empty target");
    }
    const Eigen::MatrixXd aligned = delta_i * c;
    const numkit::NeighborIndex index(delta_j);
    CorrespondenceMatrix out;
    out.rho = kernels::nearest_rows(aligned, index);
    out.target_count = delta_j.rows();
    return out;
}

std::vector<Eigen::Index> retrieve(const Eigen::MatrixXd& delta_i, const Eigen::MatrixXd& c,
                                   const Eigen::MatrixXd& delta_j, Eigen::Index row,
                                   Eigen::Index k_ret) {
    if (delta_i.cols() != c.rows() || delta_j.cols() != c.cols()) {
        throw ArgumentError("retrieve: shapes do not conform");
    }
    if (row < 0 || row >= delta_i.rows()) {
        throw ArgumentError("retrieve: query row out of range");
    }
    if (k_ret < 1 || k_ret > delta_j.rows()) {
        throw ArgumentError("retrieve: k out of range");
    }
    const Eigen::RowVectorXd aligned = delta_i.row(row) * c;
    const numkit::NeighborIndex index(delta_j);
    return index.query(aligned.transpose(), k_ret);
}

} // namespace crossmap::fmbsd
