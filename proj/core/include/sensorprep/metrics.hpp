#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>

#include "sensorprep/error.hpp"

namespace sensorprep {

struct ConfusionCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;

    std::int64_t total() const noexcept { return tp + fp + fn + tn; }
};

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
    ConfusionCounts counts;
};

/// Empty denominators: 1.0 when there was nothing to find (no true
/// positives), otherwise 0.0.
PrecisionRecall precision_recall(const ConfusionCounts& counts);

template <typename Key>
PrecisionRecall precision_recall(const std::set<Key>& truth, const std::set<Key>& predicted,
                                 const std::set<Key>& universe) {
    for (const auto* subset : {&truth, &predicted}) {
        for (const auto& key : *subset) {
            if (!universe.contains(key)) {
                throw Error(ErrorCode::InvalidArgument, "precision_recall: decision outside the universe");
            }
        }
    }
    ConfusionCounts counts;
    for (const auto& key : universe) {
        const bool actual = truth.contains(key);
        const bool flagged = predicted.contains(key);
        if (actual && flagged) ++counts.tp;
        else if (flagged) ++counts.fp;
        else if (actual) ++counts.fn;
        else ++counts.tn;
    }
    return precision_recall(counts);
}

double rmse(std::span<const double> actual, std::span<const double> estimated);
double mean_rmse(std::span<const double> per_node_rmse);

} // namespace sensorprep
