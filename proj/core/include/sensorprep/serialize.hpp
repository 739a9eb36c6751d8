#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sensorprep/anomaly.hpp"
#include "sensorprep/bayesnet.hpp"
#include "sensorprep/ingest.hpp"
#include "sensorprep/metrics.hpp"
#include "sensorprep/redundancy.hpp"
#include "sensorprep/spectra.hpp"

// JSON documents are written with sorted keys and shortest round-trip number
// formatting, so equal inputs always give byte-identical files.

namespace sensorprep {

struct PcaArtifact {
    std::vector<std::string> node_ids;
    PcaModel model;
};

struct StaticNetworkArtifact {
    std::vector<std::string> node_ids;
    DiscretizationScheme scheme;
    BayesianNetwork network;
};

struct TransitionNetworkArtifact {
    std::vector<std::string> node_ids;
    DiscretizationScheme scheme;
    TransitionNetwork network;
};

std::string to_json(const PcaArtifact& artifact);
std::string to_json(const StaticNetworkArtifact& artifact);
std::string to_json(const TransitionNetworkArtifact& artifact);

PcaArtifact pca_artifact_from_json(std::string_view text);
StaticNetworkArtifact static_network_from_json(std::string_view text);
TransitionNetworkArtifact transition_network_from_json(std::string_view text);

std::string to_json(const DetectionReport& report, std::span<const std::string> node_ids);
DetectionReport detection_report_from_json(std::string_view text);
/// row,q,t2,flagged,node,observed,predicted,abnormal,inferable. Unflagged rows
/// get one line with empty node columns; flagged rows one line per node.
void write_detection_csv(std::ostream& out, const DetectionReport& report,
                         std::span<const std::string> node_ids);

std::string to_json(const StaticRedundancyReport& report, std::span<const std::string> node_ids);
/// node,redundant,criterion
void write_static_redundancy_csv(std::ostream& out, const StaticRedundancyReport& report,
                                 std::span<const std::string> node_ids);

std::string to_json(const RealtimeReport& report, std::span<const std::string> node_ids);
/// t,node,state,max_posterior
void write_schedule_csv(std::ostream& out, const RealtimeReport& report,
                        std::span<const std::string> node_ids);

/// t,node,estimate,actual,abs_error
void write_recovery_csv(std::ostream& out, std::span<const RecoveredValue> recovery,
                        std::span<const std::string> node_ids);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double value);

} // namespace sensorprep
