#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "crossmap/errors.hpp"

namespace crossmap::synth {

enum class LatentFamily { swiss_roll, two_moons };

struct ModalitySpec {
    int dim = 2;
    std::uint64_t map_seed = 1; // 0 selects the identity map (dim must match the latent)
    double noise = 0.0;         // Gaussian noise relative to the mapped data's RMS
};

struct SyntheticSpec {
    LatentFamily family = LatentFamily::two_moons;
    int n = 200;
    int classes = 2;                     // swiss-roll angular bins; two-moons is always 2
    std::uint64_t latent_seed = 1;
    std::uint64_t permutation_seed = 2;  // 0 keeps every modality in latent order
    double labeled_fraction = 1.0;       // < 1 masks labels stratified per class
    std::uint64_t label_seed = 3;
    std::vector<ModalitySpec> modalities;
};

struct SyntheticDataset {
    Eigen::MatrixXd latent;
    std::vector<Eigen::MatrixXd> features;      // per modality, rows shuffled for i >= 1
    std::vector<std::vector<int>> labels;       // full labels aligned with feature rows
    std::vector<std::vector<int>> train_labels; // masked copy (0 = hidden)
    std::vector<Eigen::VectorXi> truth;         // truth[i-1]: modality-0 row -> modality-i row
};

/// Deterministic multimodal dataset: shared latent samples, one random linear
/// map plus noise per modality, and a seed-fixed row permutation for every
/// modality past the first. Regeneration from the same spec is bit-identical.
SyntheticDataset generate_synthetic(const SyntheticSpec& spec);

/// Splitmix/Box-Muller random stream; all distributions are implemented
/// in-house so byte-reproducibility does not depend on the standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    std::uint64_t next();
    double uniform();                // [0, 1)
    double normal();                 // standard normal, Box-Muller
    std::uint64_t below(std::uint64_t bound); // unbiased [0, bound)
    std::vector<Eigen::Index> permutation(Eigen::Index n);

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace crossmap::synth
