#pragma once

#include <filesystem>

#include <Eigen/Dense>

#include "crossmap/dataset.hpp"
#include "crossmap/errors.hpp"
#include "crossmap/synth.hpp"

namespace crossmap::pipeline {

enum class Task { correspond, retrieve, classify };

/// Generates a synthetic dataset from a JSON spec and writes feature, label,
/// ground-truth and manifest files into out_dir. Byte-reproducible for a
/// fixed spec.
void run_synth(const std::filesystem::path& spec_json, const std::filesystem::path& out_dir);

/// Runs one pipeline stage for a manifest and writes its artifacts plus
/// report.txt / report.json into out_dir. k_ret bounds the ranked lists
/// written by the retrieve task.
void run(const std::filesystem::path& manifest_path, Task task,
         const std::filesystem::path& out_dir, Eigen::Index k_ret = 10);

/// MAP of ranked prediction lists (CSV rows of 1-based target indices)
/// against per-query relevant sets (semicolon-separated 1-based indices;
/// empty row = query skipped).
double eval_map(const std::filesystem::path& pred, const std::filesystem::path& truth);

/// Accuracy of two single-label CSV files.
double eval_accuracy(const std::filesystem::path& pred, const std::filesystem::path& truth);

} // namespace crossmap::pipeline
