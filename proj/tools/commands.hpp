#pragma once

#include <iosfwd>

#include "run_config.hpp"

namespace sensorprep::cli {

// Each command writes its files under config.output and a one-line JSON
// summary to `out`. Failures are thrown as sensorprep::Error.

/// train.csv and test.csv from the synthetic source.
void cmd_synth(const RunConfig& config, std::ostream& out);
/// pca_model.json, static_network.json, transition_network.json.
void cmd_learn(const RunConfig& config, std::ostream& out);
/// test_injected.csv plus the injection.json ground-truth sidecar.
void cmd_inject(const RunConfig& config, std::ostream& out);
/// detection.{json,csv} at alpha_warning and detection_alarm.{json,csv} at alpha_alarm.
void cmd_detect(const RunConfig& config, std::ostream& out);
/// redundancy_static.{json,csv} and recovery_static.csv.
void cmd_redundancy_static(const RunConfig& config, std::ostream& out);
/// redundancy_realtime.json, schedule.csv and recovery_realtime.csv.
void cmd_redundancy_realtime(const RunConfig& config, std::ostream& out);
/// metrics.json from the detection report, the sidecar and any recovery files.
void cmd_evaluate(const RunConfig& config, std::ostream& out);

} // namespace sensorprep::cli
