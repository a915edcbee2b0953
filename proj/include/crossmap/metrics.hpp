#pragma once

#include <vector>

#include <Eigen/Dense>

#include "crossmap/errors.hpp"

namespace crossmap::metrics {

/// Average precision of a ranked 0/1 relevance sequence:
/// (1 / #relevant) * sum over relevant positions p of precision@p.
/// Throws on an empty sequence or one with no relevant item.
double average_precision(const std::vector<int>& relevance);

/// Same, but with the relevant-item total supplied externally (for rankings
/// truncated below full recall).
double average_precision(const std::vector<int>& relevance, Eigen::Index total_relevant);

enum class RelevanceRule { same_label, shared_label };

struct RetrievalResult {
    std::vector<std::vector<Eigen::Index>> rankings;
    std::vector<double> ap;   // NaN for skipped queries
    double map = 0.0;         // NaN when no query is admissible
    Eigen::Index admissible = 0;
    Eigen::Index skipped = 0; // queries with no relevant target at all
};

/// MAP over ranked target lists. Relevance of target t for query q is label
/// equality (same_label; rows must be single labels) or non-empty label
/// intersection (shared_label). Queries without any relevant target are
/// skipped and counted.
RetrievalResult map_score(const std::vector<std::vector<Eigen::Index>>& rankings,
                          const std::vector<std::vector<int>>& query_labels,
                          const std::vector<std::vector<int>>& target_labels,
                          RelevanceRule rule);

/// Fraction of positions where the two label vectors agree.
double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

} // namespace crossmap::metrics
