#include "sensorprep/metrics.hpp"

#include <cmath>

#include <fmt/format.h>

namespace sensorprep {

PrecisionRecall precision_recall(const ConfusionCounts& counts) {
    if (counts.tp < 0 || counts.fp < 0 || counts.fn < 0 || counts.tn < 0) {
        throw Error(ErrorCode::InvalidArgument, "confusion counts must be non-negative");
    }
    const bool nothing_to_find = counts.tp + counts.fn == 0;
    PrecisionRecall out;
    out.counts = counts;
    out.precision = counts.tp + counts.fp > 0
                        ? static_cast<double>(counts.tp) / static_cast<double>(counts.tp + counts.fp)
                        : (nothing_to_find ? 1.0 : 0.0);
    out.recall = counts.tp + counts.fn > 0
                     ? static_cast<double>(counts.tp) / static_cast<double>(counts.tp + counts.fn)
                     : 1.0;
    return out;
}

double rmse(std::span<const double> actual, std::span<const double> estimated) {
    if (actual.empty()) throw Error(ErrorCode::InvalidArgument, "rmse: empty input");
    if (actual.size() != estimated.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("rmse: {} actual values, {} estimates", actual.size(), estimated.size()));
    }
    double ss = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) ss += (actual[i] - estimated[i]) * (actual[i] - estimated[i]);
    return std::sqrt(ss / static_cast<double>(actual.size()));
}

double mean_rmse(std::span<const double> per_node_rmse) {
    if (per_node_rmse.empty()) throw Error(ErrorCode::InvalidArgument, "mean_rmse: no nodes");
    double sum = 0.0;
    for (const double r : per_node_rmse) sum += r;
    return sum / static_cast<double>(per_node_rmse.size());
}

} // namespace sensorprep
