#include "crossmap/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace crossmap::synth {

Rng::Rng(std::uint64_t seed) : state_(seed) {}

std::uint64_t Rng::next() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double Rng::uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Box-Muller on (0, 1] to keep the log finite.
    const double u1 = (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound < 2) return 0;
    std::uint64_t mask = bound - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    while (true) {
        const std::uint64_t v = next() & mask;
        if (v < bound) return v;
    }
}

std::vector<Eigen::Index> Rng::permutation(Eigen::Index n) {
    std::vector<Eigen::Index> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), Eigen::Index{0});
    for (Eigen::Index i = n - 1; i > 0; --i) {
        const Eigen::Index j = static_cast<Eigen::Index>(below(static_cast<std::uint64_t>(i) + 1));
        std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
    }
    return p;
}

namespace {

void sample_two_moons(int n, Rng& rng, Eigen::MatrixXd& latent, std::vector<int>& labels) {
    latent.resize(n, 2);
    labels.resize(static_cast<std::size_t>(n));
    const int first = (n + 1) / 2;
    for (int i = 0; i < n; ++i) {
        const double theta = rng.uniform() * M_PI;
        if (i < first) {
            latent(i, 0) = std::cos(theta);
            latent(i, 1) = std::sin(theta);
            labels[static_cast<std::size_t>(i)] = 1;
        } else {
            latent(i, 0) = 1.0 - std::cos(theta);
            latent(i, 1) = 0.5 - std::sin(theta);
            labels[static_cast<std::size_t>(i)] = 2;
        }
    }
}

void sample_swiss_roll(int n, int classes, Rng& rng, Eigen::MatrixXd& latent,
                       std::vector<int>& labels) {
    latent.resize(n, 3);
    labels.assign(static_cast<std::size_t>(n), 0);
    Eigen::VectorXd angle(n);
    for (int i = 0; i < n; ++i) {
        const double t = 1.5 * M_PI * (1.0 + 2.0 * rng.uniform());
        const double h = 21.0 * rng.uniform();
        latent(i, 0) = t * std::cos(t);
        latent(i, 1) = h;
        latent(i, 2) = t * std::sin(t);
        angle(i) = t;
    }
    // Angular quantile bins: equal-count classes along the roll.
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        return angle(a) < angle(b) || (angle(a) == angle(b) && a < b);
    });
    for (int rank = 0; rank < n; ++rank) {
        const int bin = static_cast<int>((static_cast<long long>(rank) * classes) / n);
        labels[static_cast<std::size_t>(idx[static_cast<std::size_t>(rank)])] = bin + 1;
    }
}

} // namespace

SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n < 10) {
        throw ArgumentError("generate_synthetic: need at least 10 samples");
    }
    if (spec.modalities.empty()) {
        throw ArgumentError("generate_synthetic: need at least one modality");
    }
    if (spec.classes < 2) {
        throw ArgumentError("generate_synthetic: need at least two classes");
    }
    if (!(spec.labeled_fraction > 0.0) || spec.labeled_fraction > 1.0) {
        throw ArgumentError("generate_synthetic: labeled_fraction must be in (0, 1]");
    }

    SyntheticDataset ds;
    std::vector<int> latent_labels;
    Rng latent_rng(spec.latent_seed);
    if (spec.family == LatentFamily::two_moons) {
        sample_two_moons(spec.n, latent_rng, ds.latent, latent_labels);
    } else {
        sample_swiss_roll(spec.n, spec.classes, latent_rng, ds.latent, latent_labels);
    }
    const Eigen::Index dim_latent = ds.latent.cols();

    for (std::size_t i = 0; i < spec.modalities.size(); ++i) {
        const ModalitySpec& ms = spec.modalities[i];
        if (ms.dim < 1) {
            throw ArgumentError("generate_synthetic: modality dimension must be positive");
        }
        if (ms.noise < 0.0) {
            throw ArgumentError("generate_synthetic: noise must be nonnegative");
        }
        Rng rng(ms.map_seed);
        Eigen::MatrixXd mapped;
        if (ms.map_seed == 0) {
            if (ms.dim != dim_latent) {
                throw ArgumentError(
                    "generate_synthetic: identity map needs dim equal to the latent dimension");
            }
            mapped = ds.latent;
        } else {
            Eigen::MatrixXd map(dim_latent, ms.dim);
            const double scale = 1.0 / std::sqrt(static_cast<double>(dim_latent));
            for (Eigen::Index r = 0; r < map.rows(); ++r) {
                for (Eigen::Index c = 0; c < map.cols(); ++c) {
                    map(r, c) = rng.normal() * scale;
                }
            }
            mapped = ds.latent * map;
        }
        if (ms.noise > 0.0) {
            const double rms =
                std::sqrt(mapped.squaredNorm() / static_cast<double>(mapped.size()));
            const double sigma = ms.noise * rms;
            for (Eigen::Index r = 0; r < mapped.rows(); ++r) {
                for (Eigen::Index c = 0; c < mapped.cols(); ++c) {
                    mapped(r, c) += sigma * rng.normal();
                }
            }
        }

        std::vector<Eigen::Index> perm;
        if (i == 0 || spec.permutation_seed == 0) {
            perm.resize(static_cast<std::size_t>(spec.n));
            std::iota(perm.begin(), perm.end(), Eigen::Index{0});
        } else {
            Rng prng(spec.permutation_seed + 1000003ull * static_cast<std::uint64_t>(i));
            perm = prng.permutation(spec.n);
        }

        Eigen::MatrixXd shuffled(mapped.rows(), mapped.cols());
        std::vector<int> labels(static_cast<std::size_t>(spec.n));
        for (Eigen::Index r = 0; r < mapped.rows(); ++r) {
            shuffled.row(perm[static_cast<std::size_t>(r)]) = mapped.row(r);
            labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(r)])] =
                latent_labels[static_cast<std::size_t>(r)];
        }
        ds.features.push_back(std::move(shuffled));
        ds.labels.push_back(std::move(labels));
        if (i >= 1) {
            Eigen::VectorXi truth(spec.n);
            for (Eigen::Index r = 0; r < spec.n; ++r) {
                truth(r) = static_cast<int>(perm[static_cast<std::size_t>(r)]);
            }
            ds.truth.push_back(std::move(truth));
        }
    }

    // Stratified masking: every class keeps at least one labeled sample.
    ds.train_labels = ds.labels;
    if (spec.labeled_fraction < 1.0) {
        for (std::size_t i = 0; i < ds.train_labels.size(); ++i) {
            Rng rng(spec.label_seed + 7919ull * static_cast<std::uint64_t>(i));
            std::vector<int>& lab = ds.train_labels[i];
            for (int cls = 1; cls <= spec.classes; ++cls) {
                std::vector<Eigen::Index> members;
                for (std::size_t r = 0; r < lab.size(); ++r) {
                    if (ds.labels[i][r] == cls) members.push_back(static_cast<Eigen::Index>(r));
                }
                if (members.empty()) continue;
                const auto count = static_cast<Eigen::Index>(members.size());
                Eigen::Index keep = static_cast<Eigen::Index>(
                    std::llround(spec.labeled_fraction * static_cast<double>(count)));
                keep = std::max<Eigen::Index>(1, std::min(keep, count));
                for (Eigen::Index pos = count - 1; pos > 0; --pos) {
                    const Eigen::Index j = static_cast<Eigen::Index>(
                        rng.below(static_cast<std::uint64_t>(pos) + 1));
                    std::swap(members[static_cast<std::size_t>(pos)],
                              members[static_cast<std::size_t>(j)]);
                }
                for (Eigen::Index pos = keep; pos < count; ++pos) {
                    lab[static_cast<std::size_t>(members[static_cast<std::size_t>(pos)])] = 0;
                }
            }
        }
    }
    return ds;
}

} // namespace crossmap::synth
