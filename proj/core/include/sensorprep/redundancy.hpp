#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sensorprep/bayesnet.hpp"
#include "sensorprep/ingest.hpp"

namespace sensorprep {

inline constexpr double kDefaultTau = 0.95;

struct StaticNodeVerdict {
    std::size_t node = 0;
    bool redundant = false;
    /// Mean over parent configurations of the largest conditional probability.
    /// Zero for parentless nodes.
    double criterion = 0.0;
    std::vector<double> row_maxima;
};

struct StaticRedundancyReport {
    double tau = kDefaultTau;
    std::vector<StaticNodeVerdict> nodes;
};

/// A node is redundant when its parents pin its state down: the mean of the
/// CPT row maxima reaches tau. Configurations are weighted uniformly.
StaticRedundancyReport ssdrda(const Dag& dag, std::span<const Cpt> cpts, double tau = kDefaultTau);

/// Posterior over a node's states given a distribution (soft or point mass)
/// for each transition parent at t-1, summed over every joint parent
/// configuration and normalized. Evidence is ordered as the CPT's parents.
std::vector<double> rsdrda_infer(std::size_t node, const TransitionNetwork& network,
                                 std::span<const std::vector<double>> parent_evidence);

/// Weighted reconstruction: sum(x_k / d_k) / sum(1 / d_k). A zero
/// dissimilarity returns that parent's value directly.
double recover(std::span<const double> parent_values, std::span<const double> dissimilarities);

/// Root-mean-square difference of two equally long sequences.
double dissimilarity(std::span<const double> a, std::span<const double> b);

struct RecoveredValue {
    std::size_t row = 0;
    std::size_t node = 0;
    double estimate = 0.0;
    double actual = 0.0;
};

/// Reconstructs every sample of every redundant node from its parents' samples
/// at the same row. Dissimilarities come from the standardized columns.
std::vector<RecoveredValue> recover_static(const SensorDataset& data, const Dag& dag,
                                           const StaticRedundancyReport& report);

enum class NodeState { Waking, Sleeping };

struct ScheduleEntry {
    std::size_t row = 0;
    std::size_t node = 0;
    NodeState state = NodeState::Waking;
    bool inferable = false;
    std::vector<double> posterior; // the prior for parentless nodes
    double max_posterior = 0.0;
};

struct SliceSummary {
    std::size_t begin = 0;
    std::size_t train_end = 0;
    std::size_t end = 0;
    Dag transitions;
};

struct ScheduleOptions {
    std::size_t slice_len = 100;
    double train_frac = 0.6;
    double tau = kDefaultTau;
    std::size_t max_parents = kDefaultMaxParents;
};

struct RealtimeReport {
    ScheduleOptions options;
    std::size_t train_len = 0;
    std::vector<SliceSummary> slices;
    std::vector<ScheduleEntry> steps; // inference rows only, row-major by (row, node)
    std::vector<RecoveredValue> recovery; // one per sleeping (row, node)
};

/// Training rows of each slice: round(slice_len * train_frac).
std::size_t training_length(const ScheduleOptions& options);

/// Time-sliced sleep scheduling. In each slice a transition network is learned
/// on the all-waking training window; each later row infers every node from
/// its parents at the previous row. Observed parents give point-mass
/// evidence, sleeping parents pass on their posterior. A node sleeps when its
/// largest posterior reaches tau. A trailing partial slice is processed when
/// it extends past its training window.
RealtimeReport rsdrda_schedule(const SensorDataset& data, const DiscretizationScheme& scheme,
                               const ScheduleOptions& options = {});

} // namespace sensorprep
