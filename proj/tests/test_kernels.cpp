#include <doctest.h>

#include <vector>

#include "crossmap/kernels.hpp"
#include "oracle_helpers.hpp"

using namespace crossmap;
using testutil::Rng;

TEST_SUITE("kernels") {

TEST_CASE("parallel kernels are bitwise equal to the serial reference") {
    Rng rng(21);
    const Eigen::MatrixXd a = testutil::random_matrix(rng, 37, 6);
    const Eigen::MatrixXd b = testutil::random_matrix(rng, 23, 6);

    const Eigen::MatrixXd d_par = kernels::pairwise_sq_dists(a, b);
    const Eigen::MatrixXd d_ser = kernels::serial::pairwise_sq_dists(a, b);
    CHECK(d_par == d_ser);

    const Eigen::MatrixXd g_par = kernels::gaussian_affinity(d_par, 2.0);
    const Eigen::MatrixXd g_ser = kernels::serial::gaussian_affinity(d_ser, 2.0);
    CHECK(g_par == g_ser);

    std::vector<Eigen::MatrixXd> p, q;
    for (int k = 0; k < 7; ++k) {
        p.push_back(testutil::random_matrix(rng, 5, 5));
        q.push_back(testutil::random_matrix(rng, 4, 4));
    }
    const Eigen::MatrixXd c = testutil::random_matrix(rng, 5, 4);
    CHECK(kernels::commutator_penalty(p, q, c) ==
          kernels::serial::commutator_penalty(p, q, c));
    CHECK(kernels::commutator_penalty_gradient(p, q, c) ==
          kernels::serial::commutator_penalty_gradient(p, q, c));

    const numkit::NeighborIndex index(b);
    const Eigen::VectorXi n_par = kernels::nearest_rows(a, index);
    const Eigen::VectorXi n_ser = kernels::serial::nearest_rows(a, index);
    CHECK(n_par == n_ser);
}

TEST_CASE("pairwise_sq_dists: zero diagonal and brute-force agreement") {
    Rng rng(22);
    const Eigen::MatrixXd a = testutil::random_matrix(rng, 15, 4);
    const Eigen::MatrixXd d = kernels::pairwise_sq_dists(a, a);
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        CHECK(d(r, r) == 0.0);
        for (Eigen::Index t = 0; t < a.rows(); ++t) {
            double acc = 0.0;
            for (Eigen::Index c = 0; c < a.cols(); ++c) {
                const double diff = a(r, c) - a(t, c);
                acc += diff * diff;
            }
            CHECK(d(r, t) == doctest::Approx(acc).epsilon(1e-12));
        }
    }
}

TEST_CASE("gaussian_affinity: exact one at zero distance") {
    Eigen::MatrixXd d(1, 3);
    d << 0.0, 1.0, 4.0;
    const Eigen::MatrixXd g = kernels::gaussian_affinity(d, 2.0);
    CHECK(g(0, 0) == 1.0);
    CHECK(g(0, 1) == doctest::Approx(std::exp(-0.5)));
    // Degenerate width: positive distances vanish, zero stays exactly one.
    const Eigen::MatrixXd g0 = kernels::gaussian_affinity(d, 0.0);
    CHECK(g0(0, 0) == 1.0);
    CHECK(g0(0, 1) == 0.0);
}

TEST_CASE("commutator_penalty: vanishes on commuting operators") {
    Rng rng(23);
    std::vector<Eigen::MatrixXd> p, q;
    for (int k = 0; k < 3; ++k) {
        const Eigen::MatrixXd diag =
            testutil::random_vector(rng, 4).asDiagonal();
        p.push_back(diag);
        q.push_back(diag);
    }
    CHECK(kernels::commutator_penalty(p, q, Eigen::MatrixXd::Identity(4, 4)) ==
          doctest::Approx(0.0));
}

TEST_CASE("kernels: shape validation") {
    Rng rng(24);
    const Eigen::MatrixXd a = testutil::random_matrix(rng, 4, 3);
    const Eigen::MatrixXd b = testutil::random_matrix(rng, 4, 2);
    CHECK_THROWS_AS(kernels::pairwise_sq_dists(a, b), ArgumentError);

    std::vector<Eigen::MatrixXd> p{testutil::random_matrix(rng, 3, 3)};
    std::vector<Eigen::MatrixXd> q{testutil::random_matrix(rng, 3, 3)};
    CHECK_THROWS_AS(
        kernels::commutator_penalty(p, q, testutil::random_matrix(rng, 2, 3)),
        ArgumentError);
}

} // TEST_SUITE
