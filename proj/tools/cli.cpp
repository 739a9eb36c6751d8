#include "cli.hpp"

#include <functional>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "commands.hpp"
#include "sensorprep/error.hpp"
#include "sensorprep/serialize.hpp"

namespace sensorprep::cli {

namespace {

struct Overrides {
    std::optional<std::string> config, train, test, data, output, model_dir;
    std::optional<std::string> profile;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> nodes, train_rows, test_rows, latent_signals;
    std::optional<double> noise, copy_noise;
    std::optional<double> alpha_warning, alpha_alarm, contribution_ratio, tau, train_frac, error_pct;
    std::optional<int> states;
    std::optional<std::size_t> max_parents, slice_len, error_rows;
};

void add_options(CLI::App& app, Overrides& o) {
    app.add_option("-c,--config", o.config, "JSON config file; flags override its keys");
    app.add_option("--train", o.train, "training CSV");
    app.add_option("--test", o.test, "test CSV");
    app.add_option("--data", o.data, "series CSV for redundancy analysis");
    app.add_option("-o,--output", o.output, "output directory (default: $SENSORPREP_OUT or ./sensorprep-out)");
    app.add_option("--model-dir", o.model_dir, "directory holding learned artifacts (default: output)");
    app.add_option("--profile", o.profile, "synthetic profile: correlated-drift, copy-child, lagged-copy");
    app.add_option("--seed", o.seed, "synthetic seed");
    app.add_option("--nodes", o.nodes, "synthetic node count");
    app.add_option("--train-rows", o.train_rows, "synthetic training rows");
    app.add_option("--test-rows", o.test_rows, "synthetic test rows");
    app.add_option("--latent-signals", o.latent_signals, "latent drift signals");
    app.add_option("--noise", o.noise, "channel noise relative to signal scale");
    app.add_option("--copy-noise", o.copy_noise, "copy noise relative to the parent's scale");
    app.add_option("--alpha-warning", o.alpha_warning, "warning test level");
    app.add_option("--alpha-alarm", o.alpha_alarm, "alarm test level");
    app.add_option("--contribution-ratio", o.contribution_ratio, "cumulative variance ratio for k");
    app.add_option("--states", o.states, "discretization states K");
    app.add_option("--max-parents", o.max_parents, "parent limit in structure search");
    app.add_option("--tau", o.tau, "redundancy / sleep threshold");
    app.add_option("--slice-len", o.slice_len, "samples per time slice");
    app.add_option("--train-frac", o.train_frac, "training fraction of each slice");
    app.add_option("--error-rows", o.error_rows, "number of trailing test rows to corrupt");
    app.add_option("--error-pct", o.error_pct, "injected error as a fraction of the training mean");
}

RunConfig resolve(const Overrides& o) {
    RunConfig c;
    c.output = default_output_dir();
    if (o.config) apply_config_json(c, read_text_file(*o.config));
    const auto set = [](auto& field, const auto& value) {
        if (value) field = *value;
    };
    if (o.train) c.train = *o.train;
    if (o.test) c.test = *o.test;
    if (o.data) c.data = *o.data;
    if (o.model_dir) c.model_dir = *o.model_dir;
    if (o.output) c.output = *o.output;
    set(c.synth.profile, o.profile);
    set(c.synth.seed, o.seed);
    set(c.synth.nodes, o.nodes);
    set(c.synth.train_rows, o.train_rows);
    set(c.synth.test_rows, o.test_rows);
    set(c.synth.latent_signals, o.latent_signals);
    set(c.synth.noise, o.noise);
    set(c.synth.copy_noise, o.copy_noise);
    set(c.alpha_warning, o.alpha_warning);
    set(c.alpha_alarm, o.alpha_alarm);
    set(c.contribution_ratio, o.contribution_ratio);
    set(c.K_states, o.states);
    set(c.max_parents, o.max_parents);
    set(c.tau, o.tau);
    set(c.slice_len, o.slice_len);
    set(c.train_frac, o.train_frac);
    set(c.error_rows, o.error_rows);
    set(c.error_pct, o.error_pct);
    validate(c);
    return c;
}

void report_error(std::ostream& err, std::string_view code, std::string_view message) {
    err << nlohmann::json{{"error", {{"code", code}, {"message", message}}}}.dump() << '\n';
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sensor data preprocessing: anomaly detection and redundancy elimination", "sensorprep"};
    app.require_subcommand(1);
    Overrides o;
    std::function<void(const RunConfig&, std::ostream&)> command;
    const std::vector<std::tuple<std::string, std::string, void (*)(const RunConfig&, std::ostream&)>> table{
        {"synth", "write synthetic train.csv and test.csv", cmd_synth},
        {"learn", "fit the PCA model and the static and transition networks", cmd_learn},
        {"inject", "corrupt the last error_rows test rows and write the ground-truth sidecar", cmd_inject},
        {"detect", "screen test rows and localize abnormal nodes", cmd_detect},
        {"redundancy-static", "find redundant nodes and reconstruct them from their parents", cmd_redundancy_static},
        {"redundancy-realtime", "time-sliced sleep scheduling with recovery", cmd_redundancy_realtime},
        {"evaluate", "precision, recall and RMSE against the injection sidecar", cmd_evaluate},
    };
    for (const auto& [name, help, fn] : table) {
        auto* sub = app.add_subcommand(name, help);
        add_options(*sub, o);
        sub->callback([&command, fn = fn] { command = fn; });
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        report_error(err, "usage", e.what());
        return 2;
    }
    try {
        command(resolve(o), out);
        return 0;
    } catch (const Error& e) {
        report_error(err, to_string(e.code()), e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        report_error(err, "io", e.what());
    } catch (const std::exception& e) {
        report_error(err, "internal", e.what());
    }
    return 1;
}

} // namespace sensorprep::cli
