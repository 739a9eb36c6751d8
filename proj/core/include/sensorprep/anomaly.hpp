#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sensorprep/bayesnet.hpp"
#include "sensorprep/ingest.hpp"
#include "sensorprep/spectra.hpp"

namespace sensorprep {

struct ScreenResult {
    double q = 0.0;
    double t2 = 0.0;
    bool q_exceeded = false;
    bool t2_exceeded = false;

    bool flagged() const noexcept { return q_exceeded || t2_exceeded; }
};

/// Rough stage: standardizes a raw sample with the model's training
/// parameters and tests Q and T2 against the model limits, OR-combined.
ScreenResult tq_screen(std::span<const double> row, const PcaModel& model);

struct NodePrediction {
    State predicted = 1;
    std::vector<double> posterior;
    /// False when the node has no transition parents; predicted is then the
    /// prior argmax and the node is never judged abnormal.
    bool inferable = false;
};

/// P(X = c | parent j in state s) from a joint-parent CPT, weighting each
/// joint configuration by its training count. Unseen parent states give a
/// uniform row.
std::vector<double> single_parent_conditional(const Cpt& cpt, std::size_t parent_position,
                                              State parent_state);

/// Naive-Bayes state inference from the parents' states one step earlier:
/// posterior(c) is proportional to prior(c) times the product of the
/// single-parent conditionals. Ties go to the lowest state.
NodePrediction nb_predict_state(std::size_t node, std::span<const State> previous_states,
                                const TransitionNetwork& network);

struct NodeVerdict {
    std::size_t node = 0;
    State observed = 1;
    State predicted = 1;
    bool inferable = false;
    bool abnormal = false;
};

struct RowDetection {
    std::size_t row = 0;
    ScreenResult screen;
    std::vector<NodeVerdict> verdicts; // empty unless screen.flagged()
};

struct DetectionReport {
    double alpha = 0.05;
    double q_limit = 0.0;
    double t2_limit = 0.0;
    std::vector<RowDetection> rows;
};

/// Two-stage detection over every test row. Flagged rows are discretized
/// together with the preceding row; `predecessor` is the raw sample that
/// precedes the first test row (normally the last training sample).
DetectionReport tqbayes_detect(const SensorDataset& test, std::span<const double> predecessor,
                               const PcaModel& model, const TransitionNetwork& network,
                               const DiscretizationScheme& scheme);

} // namespace sensorprep
