// Times the OpenMP kernels against their serial reference implementations.
// Build and run: cmake --build build --target bench_kernels && ./build/bench_kernels

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "crossmap/kernels.hpp"
#include "crossmap/numkit.hpp"
#include "crossmap/synth.hpp"

using namespace crossmap;

namespace {

Eigen::MatrixXd random_matrix(synth::Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.normal();
    }
    return m;
}

template <typename Fn>
double time_best_of(int reps, Fn&& fn) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const auto start = std::chrono::steady_clock::now();
        fn();
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        best = std::min(best, secs);
    }
    return best;
}

void row(const char* name, double serial, double parallel) {
    std::printf("%-28s %10.1f ms %10.1f ms %8.2fx\n", name, serial * 1e3, parallel * 1e3,
                serial / parallel);
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
    std::printf("openmp: not enabled\n");
#endif
    std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

    synth::Rng rng(7);
    const Eigen::MatrixXd a = random_matrix(rng, 1500, 30);
    const Eigen::MatrixXd b = random_matrix(rng, 1200, 30);

    volatile double sink = 0.0;

    double serial = time_best_of(3, [&] {
        sink = kernels::serial::pairwise_sq_dists(a, b).sum();
    });
    double parallel = time_best_of(3, [&] {
        sink = kernels::pairwise_sq_dists(a, b).sum();
    });
    row("pairwise_sq_dists", serial, parallel);

    const Eigen::MatrixXd d2 = kernels::pairwise_sq_dists(a, b);
    serial = time_best_of(5, [&] {
        sink = kernels::serial::gaussian_affinity(d2, 2.0).sum();
    });
    parallel = time_best_of(5, [&] {
        sink = kernels::gaussian_affinity(d2, 2.0).sum();
    });
    row("gaussian_affinity", serial, parallel);

    std::vector<Eigen::MatrixXd> p, q;
    for (int k = 0; k < 60; ++k) {
        p.push_back(random_matrix(rng, 60, 60));
        q.push_back(random_matrix(rng, 60, 60));
    }
    const Eigen::MatrixXd c = random_matrix(rng, 60, 60);
    serial = time_best_of(5, [&] {
        sink = kernels::serial::commutator_penalty(p, q, c);
    });
    parallel = time_best_of(5, [&] {
        sink = kernels::commutator_penalty(p, q, c);
    });
    row("commutator_penalty", serial, parallel);

    serial = time_best_of(5, [&] {
        sink = kernels::serial::commutator_penalty_gradient(p, q, c).sum();
    });
    parallel = time_best_of(5, [&] {
        sink = kernels::commutator_penalty_gradient(p, q, c).sum();
    });
    row("commutator_gradient", serial, parallel);

    const Eigen::MatrixXd refs = random_matrix(rng, 5000, 16);
    const Eigen::MatrixXd queries = random_matrix(rng, 2000, 16);
    const numkit::NeighborIndex index(refs);
    serial = time_best_of(3, [&] {
        sink = kernels::serial::nearest_rows(queries, index).sum();
    });
    parallel = time_best_of(3, [&] {
        sink = kernels::nearest_rows(queries, index).sum();
    });
    row("nearest_rows", serial, parallel);

    (void)sink;
    return 0;
}
