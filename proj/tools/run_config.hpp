#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "sensorprep/ingest.hpp"
#include "sensorprep/synth.hpp"

namespace sensorprep::cli {

struct SynthSource {
    std::string profile = "correlated-drift";
    std::uint64_t seed = 1;
    std::size_t nodes = 15;
    std::size_t train_rows = 400;
    std::size_t test_rows = 200;
    std::size_t latent_signals = 2;
    double noise = 0.05;
    double copy_noise = 0.0;
};

struct RunConfig {
    std::optional<std::filesystem::path> train;
    std::optional<std::filesystem::path> test;
    std::optional<std::filesystem::path> data;
    SynthSource synth;

    double alpha_warning = 0.05;
    double alpha_alarm = 0.01;
    double contribution_ratio = 0.85;
    int K_states = 3;
    std::size_t max_parents = 3;
    double tau = 0.95;
    std::size_t slice_len = 100;
    double train_frac = 0.6;
    std::size_t error_rows = 50;
    double error_pct = 0.10;

    std::filesystem::path output;
    /// Where learned artifacts are read from; defaults to the output directory.
    std::optional<std::filesystem::path> model_dir;

    std::filesystem::path models() const { return model_dir ? *model_dir : output; }
};

/// Output directory used when neither config nor flags name one.
std::filesystem::path default_output_dir();

/// Overlays the keys of a JSON config document onto `config`. Unknown keys are
/// rejected so typos do not pass silently.
void apply_config_json(RunConfig& config, std::string_view text);

void validate(const RunConfig& config);

SynthProfile synth_profile(const SynthSource& source);

/// Training data: the train CSV, else the first train_rows synthetic rows.
SensorDataset resolve_train(const RunConfig& config);
/// Test data: the test CSV, else the synthetic rows after the training block.
SensorDataset resolve_test(const RunConfig& config);
/// Data for redundancy analysis: the data CSV, else the train CSV, else the
/// whole synthetic series.
SensorDataset resolve_series(const RunConfig& config);
/// Both synthetic blocks in one series.
SensorDataset synth_series(const RunConfig& config);

} // namespace sensorprep::cli
