#include <doctest.h>

#include <algorithm>
#include <vector>

#include "crossmap/fmbsd.hpp"
#include "crossmap/kernels.hpp"
#include "fmbsd_instances.hpp"
#include "oracle_helpers.hpp"

using namespace crossmap;
using testutil::Rng;

namespace {

graph::SpectralBasis orthonormal_basis(Rng& rng, Eigen::Index n, Eigen::Index k) {
    graph::SpectralBasis basis;
    basis.basis = testutil::random_orthonormal(rng, n, k);
    basis.eigenvalues = Eigen::VectorXd::LinSpaced(k, 0.0, 1.5);
    basis.flavor = graph::LaplacianFlavor::normalized;
    return basis;
}

sgws::SignatureMatrix signature_of(Eigen::MatrixXd s) {
    sgws::SignatureMatrix out;
    out.resolution = static_cast<int>(s.cols()) - 1;
    out.s = std::move(s);
    return out;
}

// Algorithm step-1 bundles for a pair of feature sets, sharing one wavelet
// kernel spec.
std::pair<fmbsd::ModalityBundle, fmbsd::ModalityBundle> bundles_for(
    const Eigen::MatrixXd& x1, const Eigen::MatrixXd& x2, const fmbsd::Config& cfg) {
    std::vector<fmbsd::SpectralScaffold> scaffolds;
    scaffolds.push_back(fmbsd::build_scaffold({"a", x1}, cfg));
    scaffolds.push_back(fmbsd::build_scaffold({"b", x2}, cfg));
    const sgws::WaveletKernelSpec spec =
        fmbsd::shared_wavelet_spec(scaffolds, cfg.resolution);
    return {fmbsd::finish_bundle("a", scaffolds[0], spec),
            fmbsd::finish_bundle("b", scaffolds[1], spec)};
}

} // namespace

TEST_SUITE("fmbsd") {

TEST_CASE("project_descriptors: projection identities") {
    Rng rng(51);
    const graph::SpectralBasis basis = orthonormal_basis(rng, 12, 5);

    // Columns inside span(Delta) reconstruct exactly.
    const Eigen::MatrixXd coeffs = testutil::random_matrix(rng, 5, 3);
    const auto in_span = fmbsd::project_descriptors(basis, signature_of(basis.basis * coeffs));
    CHECK((basis.basis * in_span.a - basis.basis * coeffs).cwiseAbs().maxCoeff() < 1e-8);

    // A full orthonormal basis preserves the Frobenius norm.
    const graph::SpectralBasis full = orthonormal_basis(rng, 6, 6);
    const Eigen::MatrixXd s = testutil::random_matrix(rng, 6, 4);
    const auto a = fmbsd::project_descriptors(full, signature_of(s));
    CHECK(a.a.norm() == doctest::Approx(s.norm()));

    // Each entry is the eigenvector/descriptor dot product.
    const auto proj = fmbsd::project_descriptors(basis, signature_of(
        testutil::random_matrix(rng, 12, 4)));
    CHECK(proj.a.rows() == 5);
    CHECK(proj.a.cols() == 4);
}

TEST_CASE("project_descriptors: entries are dot products") {
    Rng rng(52);
    const graph::SpectralBasis basis = orthonormal_basis(rng, 10, 4);
    const Eigen::MatrixXd s = testutil::random_matrix(rng, 10, 3);
    const auto a = fmbsd::project_descriptors(basis, signature_of(s));
    for (Eigen::Index l = 0; l < 4; ++l) {
        for (Eigen::Index c = 0; c < 3; ++c) {
            CHECK(a.a(l, c) ==
                  doctest::Approx(basis.basis.col(l).dot(s.col(c))).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(
        fmbsd::project_descriptors(basis, signature_of(testutil::random_matrix(rng, 9, 3))),
        ArgumentError);
}

TEST_CASE("descriptor_operators: forced cases and transpose oracle") {
    Rng rng(53);
    const graph::SpectralBasis full = orthonormal_basis(rng, 7, 7);

    // Constant descriptor: diag(c 1) = c I and pinv(Delta) Delta = I.
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(7, 2);
    s.col(0).setConstant(3.25);
    const auto ops = fmbsd::descriptor_operators(full, signature_of(s));
    CHECK((ops.phi[0] - 3.25 * Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff() <
          1e-10);
    CHECK(ops.phi[1].cwiseAbs().maxCoeff() < 1e-10);

    // Orthonormal columns make pinv(Delta) = Delta^T: a second route.
    const graph::SpectralBasis basis = orthonormal_basis(rng, 9, 4);
    const Eigen::MatrixXd sig = testutil::random_matrix(rng, 9, 3);
    const auto thin = fmbsd::descriptor_operators(basis, signature_of(sig));
    for (Eigen::Index k = 0; k < 3; ++k) {
        const Eigen::MatrixXd oracle =
            basis.basis.transpose() * sig.col(k).asDiagonal() * basis.basis;
        CHECK((thin.phi[static_cast<std::size_t>(k)] - oracle).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("objective: zero at the identity for identical modalities") {
    Rng rng(54);
    const Eigen::MatrixXd x = testutil::random_matrix(rng, 30, 3);
    fmbsd::Config cfg;
    cfg.k_basis = 8;
    cfg.resolution = 4;
    cfg.knn = 4;
    cfg.lambda_b = 0.0;
    cfg.lambda_w = 0.0;
    const auto [a, b] = bundles_for(x, x, cfg);
    const Eigen::MatrixXd c = Eigen::MatrixXd::Identity(8, 8);
    const Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(30, 30);
    const double value =
        fmbsd::objective(c, a.coefficients.a, b.coefficients.a, a.operators.phi,
                         b.operators.phi, pi, a.basis.basis, b.basis.basis,
                         a.smoothness, cfg);
    CHECK(value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("objective: C = 0 isolates the target coefficients") {
    Rng rng(55);
    testutil::MapInstance inst = testutil::random_map_instance(rng, 10, 9, 5, 4, 3);
    inst.cfg.alpha = 1.0;
    inst.cfg.beta = 0.0;
    inst.cfg.lambda_b = 0.0;
    inst.cfg.lambda_w = 0.0;
    const double value =
        testutil::instance_objective(inst, Eigen::MatrixXd::Zero(5, 4));
    CHECK(value == doctest::Approx(inst.a_j.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("objective: trace form equals the alignment double sum") {
    Rng rng(56);
    for (int trial = 0; trial < 20; ++trial) {
        testutil::MapInstance inst = testutil::random_map_instance(rng, 12, 9, 5, 4, 3);
        inst.cfg.alpha = 0.0;
        inst.cfg.beta = 0.0;
        inst.cfg.lambda_b = 1.0;
        inst.cfg.lambda_w = 0.0;
        const Eigen::MatrixXd c = testutil::random_matrix(rng, 5, 4);
        const double trace_form = testutil::instance_objective(inst, c);
        const double double_sum =
            testutil::alignment_double_sum(inst.pi, inst.delta_i * c, inst.delta_j);
        CHECK(trace_form ==
              doctest::Approx(double_sum).epsilon(1e-9));
    }
}

TEST_CASE("gradient: stationary at a global minimum") {
    Rng rng(57);
    const Eigen::MatrixXd x = testutil::random_matrix(rng, 25, 3);
    fmbsd::Config cfg;
    cfg.k_basis = 6;
    cfg.resolution = 3;
    cfg.knn = 4;
    cfg.lambda_b = 0.0;
    cfg.lambda_w = 0.0;
    const auto [a, b] = bundles_for(x, x, cfg);
    const Eigen::MatrixXd g = fmbsd::gradient(
        Eigen::MatrixXd::Identity(6, 6), a.coefficients.a, b.coefficients.a,
        a.operators.phi, b.operators.phi, Eigen::MatrixXd::Zero(25, 25), a.basis.basis,
        b.basis.basis, a.smoothness, cfg);
    CHECK(g.norm() <= 1e-8);
}

TEST_CASE("gradient: zero when every active term vanishes") {
    Rng rng(58);
    testutil::MapInstance inst = testutil::random_map_instance(rng, 10, 8, 4, 4, 3);
    inst.cfg.alpha = 0.0;
    inst.cfg.beta = 0.0;
    inst.cfg.lambda_w = 0.0;
    inst.pi.setZero();
    const Eigen::MatrixXd g =
        testutil::instance_gradient(inst, testutil::random_matrix(rng, 4, 4));
    CHECK(g.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gradient: matches central finite differences on 20 random instances") {
    Rng rng(59);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n_i = 10 + static_cast<Eigen::Index>(rng.below(31));
        const Eigen::Index n_j = 10 + static_cast<Eigen::Index>(rng.below(31));
        const Eigen::Index k_i = 3 + static_cast<Eigen::Index>(rng.below(8));
        const Eigen::Index k_j = 3 + static_cast<Eigen::Index>(rng.below(8));
        const Eigen::Index q = 2 + static_cast<Eigen::Index>(rng.below(5));
        const testutil::MapInstance inst =
            testutil::random_map_instance(rng, n_i, n_j, k_i, k_j, q);
        const Eigen::MatrixXd c = testutil::random_matrix(rng, k_i, k_j);
        const Eigen::MatrixXd analytic = testutil::instance_gradient(inst, c);
        const Eigen::MatrixXd fd = testutil::fd_gradient(inst, c);
        for (Eigen::Index r = 0; r < k_i; ++r) {
            for (Eigen::Index t = 0; t < k_j; ++t) {
                const double denom =
                    std::max({1.0, std::abs(analytic(r, t)), std::abs(fd(r, t))});
                CHECK(std::abs(analytic(r, t) - fd(r, t)) / denom <= 1e-5);
            }
        }
    }
}

TEST_CASE("objective: convexity probe") {
    Rng rng(60);
    for (int trial = 0; trial < 10; ++trial) {
        const testutil::MapInstance inst = testutil::random_map_instance(rng, 12, 10, 5, 4, 3);
        const Eigen::MatrixXd c1 = testutil::random_matrix(rng, 5, 4);
        const Eigen::MatrixXd c2 = testutil::random_matrix(rng, 5, 4);
        const double t = rng.uniform();
        const double lhs = testutil::instance_objective(inst, t * c1 + (1.0 - t) * c2);
        const double rhs = t * testutil::instance_objective(inst, c1) +
                           (1.0 - t) * testutil::instance_objective(inst, c2);
        CHECK(lhs <= rhs + 1e-9);
    }
}

TEST_CASE("fit_map: identical modalities converge to the identity") {
    Rng rng(61);
    const Eigen::MatrixXd x = testutil::random_matrix(rng, 30, 3);
    fmbsd::Config cfg;
    cfg.k_basis = 6;
    cfg.resolution = 3;
    cfg.knn = 4;
    cfg.lambda_b = 0.0;
    cfg.lambda_w = 0.0;
    const auto [a, b] = bundles_for(x, x, cfg);
    const sgws::CrossSimilarity pi = sgws::cross_similarity(a.signatures, b.signatures);
    const fmbsd::FunctionalMap map = fmbsd::fit_map(a, b, pi.pi, cfg);
    CHECK(map.objective <= 1e-8);
    CHECK((map.c - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-4);
    CHECK(std::is_sorted(map.objective_history.rbegin(), map.objective_history.rend()));
}

TEST_CASE("fit_map: improves on the rectangular-identity start") {
    Rng rng(62);
    Eigen::MatrixXd x = testutil::random_matrix(rng, 40, 3);
    const std::vector<Eigen::Index> perm = rng.permutation(40);
    Eigen::MatrixXd shuffled(40, 3);
    for (Eigen::Index r = 0; r < 40; ++r) {
        shuffled.row(perm[static_cast<std::size_t>(r)]) = x.row(r);
    }

    fmbsd::Config cfg;
    cfg.k_basis = 8;
    cfg.resolution = 4;
    cfg.knn = 4;
    cfg.max_iters = 120;
    const auto [a, b] = bundles_for(x, shuffled, cfg);
    const sgws::CrossSimilarity pi =
        sgws::cross_similarity(a.signatures, b.signatures, cfg.sigma_mode);
    const fmbsd::FunctionalMap map = fmbsd::fit_map(a, b, pi.pi, cfg);

    const double at_start = fmbsd::objective(
        Eigen::MatrixXd::Identity(8, 8), a.coefficients.a, b.coefficients.a,
        a.operators.phi, b.operators.phi, pi.pi, a.basis.basis, b.basis.basis,
        a.smoothness, cfg);
    CHECK(map.objective <= at_start);
    CHECK(std::is_sorted(map.objective_history.rbegin(), map.objective_history.rend()));
    // Recorded objective agrees with a fresh evaluation.
    const double fresh = fmbsd::objective(map.c, a.coefficients.a, b.coefficients.a,
                                          a.operators.phi, b.operators.phi, pi.pi,
                                          a.basis.basis, b.basis.basis, a.smoothness, cfg);
    CHECK(std::abs(map.objective - fresh) <= 1e-9 * std::max(1.0, std::abs(fresh)));
}

TEST_CASE("extract_correspondences: identity and permutation cases") {
    Rng rng(63);
    const Eigen::MatrixXd delta = testutil::random_orthonormal(rng, 15, 4);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(4, 4);

    const fmbsd::CorrespondenceMatrix self =
        fmbsd::extract_correspondences(delta, eye, delta);
    for (Eigen::Index r = 0; r < 15; ++r) CHECK(self.rho(r) == r);

    const std::vector<Eigen::Index> perm = rng.permutation(15);
    Eigen::MatrixXd shuffled(15, 4);
    for (Eigen::Index r = 0; r < 15; ++r) {
        shuffled.row(perm[static_cast<std::size_t>(r)]) = delta.row(r);
    }
    const fmbsd::CorrespondenceMatrix mapped =
        fmbsd::extract_correspondences(delta, eye, shuffled);
    for (Eigen::Index r = 0; r < 15; ++r) {
        CHECK(mapped.rho(r) == perm[static_cast<std::size_t>(r)]);
    }

    const Eigen::MatrixXd p = mapped.dense();
    CHECK(p.rowwise().sum().minCoeff() == 1.0);
    CHECK(p.rowwise().sum().maxCoeff() == 1.0);
}

TEST_CASE("extract_correspondences: equals exhaustive nearest-row scan") {
    Rng rng(64);
    const Eigen::MatrixXd delta_i = testutil::random_matrix(rng, 25, 5);
    const Eigen::MatrixXd c = testutil::random_matrix(rng, 5, 3);
    const Eigen::MatrixXd delta_j = testutil::random_matrix(rng, 18, 3);
    const fmbsd::CorrespondenceMatrix corr =
        fmbsd::extract_correspondences(delta_i, c, delta_j);
    const Eigen::MatrixXd aligned = delta_i * c;
    for (Eigen::Index r = 0; r < 25; ++r) {
        Eigen::Index best = 0;
        double best_d = (aligned.row(r) - delta_j.row(0)).squaredNorm();
        for (Eigen::Index t = 1; t < 18; ++t) {
            const double d = (aligned.row(r) - delta_j.row(t)).squaredNorm();
            if (d < best_d) {
                best_d = d;
                best = t;
            }
        }
        CHECK(corr.rho(r) == best);
    }
}

TEST_CASE("retrieve: consistency, completeness, sorted-scan oracle") {
    Rng rng(65);
    const Eigen::MatrixXd delta_i = testutil::random_matrix(rng, 12, 4);
    const Eigen::MatrixXd c = testutil::random_matrix(rng, 4, 4);
    const Eigen::MatrixXd delta_j = testutil::random_matrix(rng, 14, 4);
    const fmbsd::CorrespondenceMatrix corr =
        fmbsd::extract_correspondences(delta_i, c, delta_j);

    for (Eigen::Index r = 0; r < 12; ++r) {
        const auto top1 = fmbsd::retrieve(delta_i, c, delta_j, r, 1);
        CHECK(top1.size() == 1);
        CHECK(top1[0] == corr.rho(r));
    }

    const auto all = fmbsd::retrieve(delta_i, c, delta_j, 3, 14);
    std::vector<Eigen::Index> sorted_all = all;
    std::sort(sorted_all.begin(), sorted_all.end());
    for (Eigen::Index t = 0; t < 14; ++t) CHECK(sorted_all[static_cast<std::size_t>(t)] == t);

    const auto top5 = fmbsd::retrieve(delta_i, c, delta_j, 7, 5);
    const Eigen::RowVectorXd probe = delta_i.row(7) * c;
    std::vector<std::pair<double, Eigen::Index>> scan;
    for (Eigen::Index t = 0; t < 14; ++t) {
        scan.emplace_back((probe - delta_j.row(t)).squaredNorm(), t);
    }
    std::sort(scan.begin(), scan.end());
    for (int i = 0; i < 5; ++i) {
        CHECK(top5[static_cast<std::size_t>(i)] == scan[static_cast<std::size_t>(i)].second);
    }

    CHECK_THROWS_AS(fmbsd::retrieve(delta_i, c, delta_j, 0, 0), ArgumentError);
    CHECK_THROWS_AS(fmbsd::retrieve(delta_i, c, delta_j, 0, 15), ArgumentError);
}

TEST_CASE("similarity_row_sums: matches per-row and per-column totals") {
    Rng rng(66);
    const Eigen::MatrixXd pi = testutil::random_uniform(rng, 7, 5);
    const fmbsd::SimilarityRowSums sums = fmbsd::similarity_row_sums(pi);
    for (Eigen::Index r = 0; r < 7; ++r) {
        CHECK(sums.row_sums(r) == doctest::Approx(pi.row(r).sum()).epsilon(1e-12));
    }
    for (Eigen::Index t = 0; t < 5; ++t) {
        CHECK(sums.col_sums(t) == doctest::Approx(pi.col(t).sum()).epsilon(1e-12));
    }
}

} // TEST_SUITE
