#include "run_config.hpp"

#include <cstdlib>

#include <fmt/format.h>
#include <json.hpp>

#include "sensorprep/error.hpp"

namespace sensorprep::cli {

using nlohmann::json;

std::filesystem::path default_output_dir() {
    if (const char* env = std::getenv("SENSORPREP_OUT"); env && *env) return env;
    return "sensorprep-out";
}

namespace {

template <typename T>
void take(const json& j, std::string_view key, T& out) {
    if (const auto it = j.find(key); it != j.end()) out = it->get<T>();
}

void take_path(const json& j, std::string_view key, std::optional<std::filesystem::path>& out) {
    if (const auto it = j.find(key); it != j.end()) out = it->get<std::string>();
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> known, std::string_view where) {
    for (const auto& [key, value] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw Error(ErrorCode::InvalidArgument, fmt::format("unknown config key '{}{}'", where, key));
        }
    }
}

} // namespace

void apply_config_json(RunConfig& c, std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, fmt::format("config: {}", e.what()));
    }
    if (!j.is_object()) throw Error(ErrorCode::Parse, "config: top level must be an object");
    reject_unknown(j,
                   {"train", "test", "data", "synth", "alpha_warning", "alpha_alarm", "contribution_ratio",
                    "K_states", "max_parents", "tau", "slice_len", "train_frac", "error_rows", "error_pct",
                    "output", "model_dir"},
                   "");
    try {
        take_path(j, "train", c.train);
        take_path(j, "test", c.test);
        take_path(j, "data", c.data);
        take_path(j, "model_dir", c.model_dir);
        if (const auto it = j.find("output"); it != j.end()) c.output = it->get<std::string>();
        take(j, "alpha_warning", c.alpha_warning);
        take(j, "alpha_alarm", c.alpha_alarm);
        take(j, "contribution_ratio", c.contribution_ratio);
        take(j, "K_states", c.K_states);
        take(j, "max_parents", c.max_parents);
        take(j, "tau", c.tau);
        take(j, "slice_len", c.slice_len);
        take(j, "train_frac", c.train_frac);
        take(j, "error_rows", c.error_rows);
        take(j, "error_pct", c.error_pct);
        if (const auto it = j.find("synth"); it != j.end()) {
            const auto& s = *it;
            if (!s.is_object()) throw Error(ErrorCode::Parse, "config: 'synth' must be an object");
            reject_unknown(s,
                           {"profile", "seed", "nodes", "train_rows", "test_rows", "latent_signals", "noise",
                            "copy_noise"},
                           "synth.");
            take(s, "profile", c.synth.profile);
            take(s, "seed", c.synth.seed);
            take(s, "nodes", c.synth.nodes);
            take(s, "train_rows", c.synth.train_rows);
            take(s, "test_rows", c.synth.test_rows);
            take(s, "latent_signals", c.synth.latent_signals);
            take(s, "noise", c.synth.noise);
            take(s, "copy_noise", c.synth.copy_noise);
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, fmt::format("config: {}", e.what()));
    }
}

void validate(const RunConfig& c) {
    const auto fraction = [](double v, std::string_view name) {
        if (!(v > 0.0 && v <= 1.0)) {
            throw Error(ErrorCode::InvalidArgument, fmt::format("{} = {} outside (0, 1]", name, v));
        }
    };
    const auto positive = [](std::size_t v, std::string_view name) {
        if (v == 0) throw Error(ErrorCode::InvalidArgument, fmt::format("{} must be positive", name));
    };
    fraction(c.contribution_ratio, "contribution_ratio");
    fraction(c.tau, "tau");
    fraction(c.train_frac, "train_frac");
    fraction(c.error_pct, "error_pct");
    for (const auto& [v, name] : {std::pair{c.alpha_warning, "alpha_warning"}, std::pair{c.alpha_alarm, "alpha_alarm"}}) {
        if (!(v > 0.0 && v < 1.0)) throw Error(ErrorCode::InvalidArgument, fmt::format("{} = {} outside (0, 1)", name, v));
    }
    if (c.alpha_alarm > c.alpha_warning) {
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("alpha_alarm {} exceeds alpha_warning {}", c.alpha_alarm, c.alpha_warning));
    }
    if (c.K_states < 2) throw Error(ErrorCode::InvalidArgument, fmt::format("K_states = {} below 2", c.K_states));
    positive(c.max_parents, "max_parents");
    positive(c.slice_len, "slice_len");
    positive(c.error_rows, "error_rows");
    positive(c.synth.nodes, "synth.nodes");
    positive(c.synth.train_rows, "synth.train_rows");
    positive(c.synth.test_rows, "synth.test_rows");
    positive(c.synth.latent_signals, "synth.latent_signals");
    parse_synth_kind(c.synth.profile);
}

SynthProfile synth_profile(const SynthSource& s) {
    SynthProfile p;
    p.kind = parse_synth_kind(s.profile);
    p.latent_signals = s.latent_signals;
    p.noise = s.noise;
    p.copy_noise = s.copy_noise;
    return p;
}

SensorDataset synth_series(const RunConfig& c) {
    return synth_generate(c.synth.seed, c.synth.train_rows + c.synth.test_rows, c.synth.nodes, synth_profile(c.synth));
}

SensorDataset resolve_train(const RunConfig& c) {
    if (c.train) return load_csv(*c.train);
    return synth_series(c).slice_rows(0, c.synth.train_rows);
}

SensorDataset resolve_test(const RunConfig& c) {
    if (c.test) return load_csv(*c.test);
    const auto all = synth_series(c);
    return all.slice_rows(c.synth.train_rows, all.rows());
}

SensorDataset resolve_series(const RunConfig& c) {
    if (c.data) return load_csv(*c.data);
    if (c.train) return load_csv(*c.train);
    return synth_series(c);
}

} // namespace sensorprep::cli
