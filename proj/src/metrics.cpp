#include "crossmap/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace crossmap::metrics {

double average_precision(const std::vector<int>& relevance) {
    Eigen::Index total = 0;
    for (int r : relevance) total += r != 0 ? 1 : 0;
    return average_precision(relevance, total);
}

double average_precision(const std::vector<int>& relevance, Eigen::Index total_relevant) {
    if (relevance.empty()) {
        throw ArgumentError("average_precision: empty ranking");
    }
    if (total_relevant < 1) {
        throw ArgumentError("average_precision: no relevant item");
    }
    double sum = 0.0;
    Eigen::Index hits = 0;
    for (std::size_t p = 0; p < relevance.size(); ++p) {
        if (relevance[p] != 0) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(p + 1);
        }
    }
    return sum / static_cast<double>(total_relevant);
}

namespace {

bool relevant(const std::vector<int>& a, const std::vector<int>& b, RelevanceRule rule) {
    if (rule == RelevanceRule::same_label) {
        if (a.size() > 1 || b.size() > 1) {
            throw ArgumentError("map_score: same_label rule needs single-label rows");
        }
        // Unlabeled rows are never relevant; queries without any relevant
        // target are skipped upstream.
        return !a.empty() && !b.empty() && a[0] == b[0];
    }
    for (int x : a) {
        if (std::find(b.begin(), b.end(), x) != b.end()) return true;
    }
    return false;
}

} // namespace

RetrievalResult map_score(const std::vector<std::vector<Eigen::Index>>& rankings,
                          const std::vector<std::vector<int>>& query_labels,
                          const std::vector<std::vector<int>>& target_labels,
                          RelevanceRule rule) {
    if (rankings.size() != query_labels.size()) {
        throw ArgumentError("map_score: one ranking per query required");
    }
    RetrievalResult out;
    out.rankings = rankings;
    out.ap.assign(rankings.size(), std::numeric_limits<double>::quiet_NaN());

    double total_ap = 0.0;
    for (std::size_t q = 0; q < rankings.size(); ++q) {
        Eigen::Index total_relevant = 0;
        for (const auto& tl : target_labels) {
            if (relevant(query_labels[q], tl, rule)) ++total_relevant;
        }
        if (total_relevant == 0) {
            ++out.skipped;
            continue;
        }
        std::vector<int> seq;
        seq.reserve(rankings[q].size());
        for (Eigen::Index t : rankings[q]) {
            if (t < 0 || t >= static_cast<Eigen::Index>(target_labels.size())) {
                throw ArgumentError("map_score: ranked index out of range");
            }
            seq.push_back(
                relevant(query_labels[q], target_labels[static_cast<std::size_t>(t)], rule)
                    ? 1
                    : 0);
        }
        const double ap = average_precision(seq, total_relevant);
        out.ap[q] = ap;
        total_ap += ap;
        ++out.admissible;
    }
    out.map = out.admissible > 0 ? total_ap / static_cast<double>(out.admissible)
                                 : std::numeric_limits<double>::quiet_NaN();
    return out;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size()) {
        throw ArgumentError("accuracy: length mismatch");
    }
    if (predicted.empty()) {
        throw ArgumentError("accuracy: empty input");
    }
    Eigen::Index correct = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] == truth[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(predicted.size());
}

} // namespace crossmap::metrics
