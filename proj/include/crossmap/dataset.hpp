#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crossmap/errors.hpp"
#include "crossmap/fmbsd.hpp"
#include "crossmap/m2cpc.hpp"

namespace crossmap::io {

/// Feature CSV: no header, one sample per row, comma-separated decimals.
Eigen::MatrixXd load_feature_csv(const std::filesystem::path& path);

/// Label CSV: one row per sample. A single integer, semicolon-separated
/// integers for multi-label rows, or the literal `?` for unlabeled (returned
/// as an empty set).
std::vector<std::vector<int>> load_label_csv(const std::filesystem::path& path);

/// Correspondence CSV: `source_index,target_index` pairs, 1-based. Returns a
/// 0-based assignment vector with one target per source row.
Eigen::VectorXi load_correspondence_csv(const std::filesystem::path& path,
                                        Eigen::Index source_count,
                                        Eigen::Index target_count);

void write_feature_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);
void write_label_csv(const std::filesystem::path& path,
                     const std::vector<std::vector<int>>& labels);
void write_correspondence_csv(const std::filesystem::path& path, const Eigen::VectorXi& rho);

/// Classifier settings carried by the manifest's `m2cpc` section.
struct M2cpcSettings {
    double gamma_a = 1e-6;
    double gamma_w = 1e-6;
    double gamma_b = 1e-6;
    double kernel_width = 0.0; // <= 0 selects the median-distance heuristic
    m2cpc::MpMode mp_mode = m2cpc::MpMode::laplacian_exact;
    bool use_ground_truth_correspondences = false;
};

struct ModalityEntry {
    std::string id;
    std::filesystem::path features;
    std::optional<std::filesystem::path> labels;
    std::optional<std::filesystem::path> eval_labels;
};

struct Manifest {
    std::vector<ModalityEntry> modalities;
    std::optional<std::filesystem::path> ground_truth;
    int classes = 0; // 0: infer from labels
    fmbsd::Config fmbsd;
    M2cpcSettings m2cpc;
};

/// Parses a manifest; relative file paths are resolved against its directory.
Manifest load_manifest(const std::filesystem::path& path);

struct Dataset {
    Manifest manifest;
    std::vector<graph::FeatureMatrix> features;
    std::vector<std::optional<std::vector<std::vector<int>>>> labels;
    std::vector<std::optional<std::vector<std::vector<int>>>> eval_labels;
    std::optional<Eigen::VectorXi> ground_truth; // modality 0 -> modality 1
};

/// Loads every file the manifest references and checks row alignment.
Dataset load_dataset(const std::filesystem::path& manifest_path);

} // namespace crossmap::io
