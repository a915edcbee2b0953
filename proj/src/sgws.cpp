#include "crossmap/sgws.hpp"

#include <cmath>

#include "crossmap/kernels.hpp"

namespace crossmap::sgws {

WaveletKernelSpec default_kernels(double lambda_max, double lambda_min_nz, int resolution) {
    if (!(lambda_min_nz > 0.0) || !(lambda_max > lambda_min_nz)) {
        throw ArgumentError("default_kernels: need 0 < lambda_min_nz < lambda_max");
    }
    if (resolution < 1) {
        throw ArgumentError("default_kernels: resolution must be >= 1");
    }

    WaveletKernelSpec spec;
    spec.resolution = resolution;
    spec.g = [](double x) { return x * std::exp(-x); };
    const double gamma = std::exp(-1.0);       // h(0) matches max g = e^{-1}
    const double width = 0.6 * lambda_min_nz;
    spec.h = [gamma, width](double x) {
        const double r = x / width;
        return gamma * std::exp(-(r * r) * (r * r));
    };

    const double top = 2.0 / lambda_min_nz;
    const double bottom = 2.0 / lambda_max;
    spec.scales.resize(static_cast<std::size_t>(resolution));
    if (resolution == 1) {
        spec.scales[0] = top;
    } else {
        const double log_top = std::log(top), log_bottom = std::log(bottom);
        for (int m = 0; m < resolution; ++m) {
            const double t = static_cast<double>(m) / static_cast<double>(resolution - 1);
            spec.scales[static_cast<std::size_t>(m)] =
                std::exp(log_top + t * (log_bottom - log_top));
        }
    }
    return spec;
}

SignatureMatrix sgws_matrix(const graph::SpectralBasis& basis, const WaveletKernelSpec& spec) {
    if (basis.flavor != graph::LaplacianFlavor::normalized) {
        throw ArgumentError("sgws_matrix: basis must come from the normalized Laplacian");
    }
    const Eigen::Index k = basis.eigenvalues.size();
    if (k < 1 || basis.basis.cols() != k) {
        throw ArgumentError("sgws_matrix: basis needs at least one eigenpair");
    }
    const int r = spec.resolution;
    if (r < 1 || static_cast<int>(spec.scales.size()) != r) {
        throw ArgumentError("sgws_matrix: kernel spec has no scales");
    }

    // Filter responses per eigenvalue; the signature is (U .^ 2) * F.
    Eigen::MatrixXd filters(k, r + 1);
    for (Eigen::Index l = 0; l < k; ++l) {
        const double lambda = basis.eigenvalues(l);
        for (int m = 0; m < r; ++m) {
            filters(l, m) = spec.g(spec.scales[static_cast<std::size_t>(m)] * lambda);
        }
        filters(l, r) = spec.h(lambda);
    }

    SignatureMatrix out;
    out.resolution = r;
    out.s = basis.basis.array().square().matrix() * filters;
    return out;
}

double sgws_distance(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                     const Eigen::Ref<const Eigen::RowVectorXd>& b) {
    if (a.size() != b.size()) {
        throw ArgumentError("sgws_distance: signature lengths differ");
    }
    return (a - b).squaredNorm();
}

CrossSimilarity cross_similarity(const SignatureMatrix& si, const SignatureMatrix& sj,
                                 SimilarityBandwidth mode) {
    if (si.s.cols() != sj.s.cols()) {
        throw ArgumentError("cross_similarity: signature matrices have different q");
    }
    const Eigen::MatrixXd dists = kernels::pairwise_sq_dists(si.s, sj.s);

    const double n = static_cast<double>(dists.size());
    const double mean = dists.sum() / n;
    const double var = (dists.array() - mean).square().sum() / n;
    const double sd = std::sqrt(var);
    const double sigma = mode == SimilarityBandwidth::std_dev ? sd : var;
    if (!(sigma > 0.0)) {
        throw DegenerateSimilarityError(
            "cross_similarity: all pairwise signature distances coincide");
    }

    CrossSimilarity out;
    out.bandwidth = sigma;
    out.pi = kernels::gaussian_affinity(dists.cwiseProduct(dists), 2.0 * sigma * sigma);
    return out;
}

} // namespace crossmap::sgws
