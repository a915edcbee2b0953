#include <doctest.h>

#include <cmath>
#include <vector>

#include "crossmap/graph_spectral.hpp"
#include "crossmap/sgws.hpp"
#include "oracle_helpers.hpp"

using namespace crossmap;
using testutil::Rng;

namespace {

graph::SpectralBasis full_normalized_basis(const Eigen::MatrixXd& weights) {
    graph::NeighborGraph g;
    g.weights = weights;
    g.k = 1;
    g.sigma = 1.0;
    const graph::Laplacian l = graph::laplacian(g, graph::LaplacianFlavor::normalized);
    return graph::spectral_basis(l, weights.rows());
}

Eigen::MatrixXd path_weights(Eigen::Index n) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        w(i, i + 1) = 1.0;
        w(i + 1, i) = 1.0;
    }
    return w;
}

// Wavelet and scaling coefficients of delta functions evaluated the long way:
// graph Fourier transform of the delta first, then the filtered synthesis.
Eigen::MatrixXd brute_force_signatures(const graph::SpectralBasis& basis,
                                       const sgws::WaveletKernelSpec& spec) {
    const Eigen::Index n = basis.basis.rows();
    const Eigen::Index k = basis.eigenvalues.size();
    Eigen::MatrixXd out(n, spec.resolution + 1);
    for (Eigen::Index r = 0; r < n; ++r) {
        Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
        delta(r) = 1.0;
        Eigen::VectorXd fourier(k);
        for (Eigen::Index l = 0; l < k; ++l) {
            fourier(l) = basis.basis.col(l).dot(delta);
        }
        for (int m = 0; m < spec.resolution; ++m) {
            double acc = 0.0;
            for (Eigen::Index l = 0; l < k; ++l) {
                acc += spec.g(spec.scales[static_cast<std::size_t>(m)] *
                              basis.eigenvalues(l)) *
                       fourier(l) * basis.basis(r, l);
            }
            out(r, m) = acc;
        }
        double acc = 0.0;
        for (Eigen::Index l = 0; l < k; ++l) {
            acc += spec.h(basis.eigenvalues(l)) * fourier(l) * basis.basis(r, l);
        }
        out(r, spec.resolution) = acc;
    }
    return out;
}

} // namespace

TEST_SUITE("sgws") {

TEST_CASE("default_kernels: band-pass and low-pass conditions") {
    const sgws::WaveletKernelSpec spec = sgws::default_kernels(2.0, 0.1, 3);
    CHECK(spec.g(0.0) == 0.0);
    CHECK(spec.g(1.0) == doctest::Approx(std::exp(-1.0))); // max of x e^{-x} at x = 1
    CHECK(spec.g(1.0) >= spec.g(0.5));
    CHECK(spec.g(1.0) >= spec.g(2.0));
    CHECK(spec.g(50.0) < 1e-12);
    CHECK(spec.h(0.0) == doctest::Approx(std::exp(-1.0)));
    CHECK(spec.h(100.0) < 1e-12);
}

TEST_CASE("default_kernels: log-spaced descending scales") {
    const sgws::WaveletKernelSpec spec = sgws::default_kernels(2.0, 0.1, 3);
    // Recompute the spacing: geometric from 2/0.1 = 20 down to 2/2 = 1.
    std::vector<double> expected(3);
    for (int m = 0; m < 3; ++m) {
        expected[static_cast<std::size_t>(m)] =
            std::exp(std::log(20.0) + (m / 2.0) * (std::log(1.0) - std::log(20.0)));
    }
    REQUIRE(spec.scales.size() == 3);
    CHECK(spec.scales[0] == doctest::Approx(20.0));
    CHECK(spec.scales[1] == doctest::Approx(expected[1]));
    CHECK(spec.scales[2] == doctest::Approx(1.0));
    CHECK(spec.scales[0] > spec.scales[1]);
    CHECK(spec.scales[1] > spec.scales[2]);

    CHECK_THROWS_AS(sgws::default_kernels(-1.0, 0.1, 3), ArgumentError);
    CHECK_THROWS_AS(sgws::default_kernels(2.0, 0.0, 3), ArgumentError);
    CHECK_THROWS_AS(sgws::default_kernels(0.1, 2.0, 3), ArgumentError);
    CHECK_THROWS_AS(sgws::default_kernels(2.0, 0.1, 0), ArgumentError);
}

TEST_CASE("sgws_matrix: single-vertex basis") {
    graph::SpectralBasis basis;
    basis.eigenvalues = Eigen::VectorXd::Zero(1);
    basis.basis = Eigen::MatrixXd::Ones(1, 1);
    basis.flavor = graph::LaplacianFlavor::normalized;
    const sgws::WaveletKernelSpec spec = sgws::default_kernels(2.0, 0.5, 4);
    const sgws::SignatureMatrix s = sgws::sgws_matrix(basis, spec);
    REQUIRE(s.s.cols() == 5);
    for (int m = 0; m < 4; ++m) CHECK(s.s(0, m) == 0.0); // g(0) = 0
    CHECK(s.s(0, 4) == doctest::Approx(spec.h(0.0)));
}

TEST_CASE("sgws_matrix: full-spectrum column sums collapse to filter sums") {
    const graph::SpectralBasis basis = full_normalized_basis(path_weights(6));
    const sgws::WaveletKernelSpec spec = sgws::default_kernels(
        basis.eigenvalues.maxCoeff(), basis.eigenvalues(1), 4);
    const sgws::SignatureMatrix s = sgws::sgws_matrix(basis, spec);
    // Orthonormal columns: sum_r u_l(r)^2 = 1, so each column sums to the
    // plain sum of its filter over the spectrum.
    for (int m = 0; m <= 4; ++m) {
        double filter_sum = 0.0;
        for (Eigen::Index l = 0; l < basis.eigenvalues.size(); ++l) {
            filter_sum += m < 4 ? spec.g(spec.scales[static_cast<std::size_t>(m)] *
                                         basis.eigenvalues(l))
                                : spec.h(basis.eigenvalues(l));
        }
        CHECK(s.s.col(m).sum() == doctest::Approx(filter_sum).epsilon(1e-10));
    }
}

TEST_CASE("sgws_matrix: equals brute-force delta-function evaluation") {
    const graph::SpectralBasis basis = full_normalized_basis(path_weights(10));
    const sgws::WaveletKernelSpec spec = sgws::default_kernels(
        basis.eigenvalues.maxCoeff(), basis.eigenvalues(1), 4);
    const sgws::SignatureMatrix s = sgws::sgws_matrix(basis, spec);
    const Eigen::MatrixXd oracle = brute_force_signatures(basis, spec);
    CHECK((s.s - oracle).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("sgws_matrix: permutation equivariance at full spectrum") {
    Rng rng(41);
    const graph::FeatureMatrix x{"m", testutil::random_matrix(rng, 12, 3)};
    const graph::NeighborGraph g = graph::build_knn_graph(x, 3);

    const graph::SpectralBasis basis = full_normalized_basis(g.weights);
    const sgws::WaveletKernelSpec spec = sgws::default_kernels(
        basis.eigenvalues.maxCoeff(), basis.eigenvalues(1), 3);
    const sgws::SignatureMatrix s = sgws::sgws_matrix(basis, spec);

    const std::vector<Eigen::Index> perm = rng.permutation(12);
    Eigen::MatrixXd pw(12, 12);
    for (Eigen::Index r = 0; r < 12; ++r) {
        for (Eigen::Index t = 0; t < 12; ++t) {
            pw(perm[static_cast<std::size_t>(r)], perm[static_cast<std::size_t>(t)]) =
                g.weights(r, t);
        }
    }
    const sgws::SignatureMatrix sp = sgws::sgws_matrix(full_normalized_basis(pw), spec);
    for (Eigen::Index r = 0; r < 12; ++r) {
        CHECK((sp.s.row(perm[static_cast<std::size_t>(r)]) - s.s.row(r))
                  .cwiseAbs()
                  .maxCoeff() < 1e-8);
    }
}

TEST_CASE("sgws_matrix: rejects non-normalized basis") {
    graph::SpectralBasis basis;
    basis.eigenvalues = Eigen::VectorXd::Zero(1);
    basis.basis = Eigen::MatrixXd::Ones(1, 1);
    basis.flavor = graph::LaplacianFlavor::combinatorial;
    CHECK_THROWS_AS(sgws::sgws_matrix(basis, sgws::default_kernels(2.0, 0.5, 2)),
                    ArgumentError);
}

TEST_CASE("sgws_distance: forced values and brute force") {
    Eigen::RowVectorXd a(2), b(2);
    a << 1, 0;
    b << 0, 1;
    CHECK(sgws::sgws_distance(a, a) == 0.0);
    CHECK(sgws::sgws_distance(a, b) == doctest::Approx(2.0));

    Rng rng(42);
    const Eigen::RowVectorXd u = testutil::random_matrix(rng, 1, 7);
    const Eigen::RowVectorXd v = testutil::random_matrix(rng, 1, 7);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < 7; ++i) acc += (u(i) - v(i)) * (u(i) - v(i));
    CHECK(sgws::sgws_distance(u, v) == doctest::Approx(acc).epsilon(1e-12));

    Eigen::RowVectorXd w(3);
    w.setZero();
    CHECK_THROWS_AS(sgws::sgws_distance(a, w), ArgumentError);
}

TEST_CASE("cross_similarity: degenerate and forced values") {
    sgws::SignatureMatrix same;
    same.s = Eigen::MatrixXd::Ones(3, 2);
    same.resolution = 1;
    CHECK_THROWS_AS(sgws::cross_similarity(same, same), DegenerateSimilarityError);

    // Distances {1, 3}: mean 2, population sd 1, so the d = 1 pair sits at
    // exactly one bandwidth.
    sgws::SignatureMatrix si, sj;
    si.s = Eigen::MatrixXd::Zero(1, 1);
    sj.s = Eigen::MatrixXd(2, 1);
    sj.s << 1.0, std::sqrt(3.0);
    si.resolution = sj.resolution = 0;
    const sgws::CrossSimilarity sim = sgws::cross_similarity(si, sj);
    CHECK(sim.bandwidth == doctest::Approx(1.0));
    CHECK(sim.pi(0, 0) == doctest::Approx(std::exp(-0.5)));
    CHECK(sim.pi(0, 1) == doctest::Approx(std::exp(-4.5)));

    // Variance mode uses sigma = var: distances {1, 5} have sd 2, var 4.
    sgws::SignatureMatrix sk;
    sk.s = Eigen::MatrixXd(2, 1);
    sk.s << 1.0, std::sqrt(5.0);
    sk.resolution = 0;
    const sgws::CrossSimilarity sd_sim = sgws::cross_similarity(si, sk);
    CHECK(sd_sim.bandwidth == doctest::Approx(2.0));
    CHECK(sd_sim.pi(0, 0) == doctest::Approx(std::exp(-1.0 / 8.0)));
    const sgws::CrossSimilarity var_sim =
        sgws::cross_similarity(si, sk, sgws::SimilarityBandwidth::variance);
    CHECK(var_sim.bandwidth == doctest::Approx(4.0));
    CHECK(var_sim.pi(0, 0) == doctest::Approx(std::exp(-1.0 / 32.0)));
}

TEST_CASE("cross_similarity: zero distance gives exactly one, range (0,1]") {
    Rng rng(43);
    sgws::SignatureMatrix si, sj;
    si.s = testutil::random_matrix(rng, 6, 4);
    sj.s = si.s;
    const sgws::CrossSimilarity sim = sgws::cross_similarity(si, sj);
    for (Eigen::Index r = 0; r < 6; ++r) {
        CHECK(sim.pi(r, r) == 1.0); // identical signature rows
        for (Eigen::Index t = 0; t < 6; ++t) {
            CHECK(sim.pi(r, t) > 0.0);
            CHECK(sim.pi(r, t) <= 1.0);
        }
    }
}

} // TEST_SUITE
