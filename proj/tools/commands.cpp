#include "commands.hpp"

#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "sensorprep/sensorprep.hpp"

namespace sensorprep::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void write_csv_file(const fs::path& path, auto&& writer) {
    std::ostringstream s;
    writer(s);
    write_text_file(path, s.str());
}

void emit(std::ostream& out, const json& summary) { out << summary.dump() << '\n'; }

fs::path artifact(const RunConfig& c, std::string_view name) {
    const auto path = c.models() / name;
    if (!fs::exists(path)) {
        throw Error(ErrorCode::Io, fmt::format("missing artifact '{}'; run 'learn' first", path.string()));
    }
    return path;
}

json pr_json(const PrecisionRecall& pr) {
    return {{"precision", pr.precision}, {"recall", pr.recall}, {"tp", pr.counts.tp},
            {"fp", pr.counts.fp},        {"fn", pr.counts.fn},   {"tn", pr.counts.tn}};
}

} // namespace

void cmd_synth(const RunConfig& c, std::ostream& out) {
    const auto all = synth_series(c);
    const auto train = all.slice_rows(0, c.synth.train_rows);
    const auto test = all.slice_rows(c.synth.train_rows, all.rows());
    save_csv(c.output / "train.csv", train);
    save_csv(c.output / "test.csv", test);
    emit(out, {{"command", "synth"},
               {"profile", c.synth.profile},
               {"seed", c.synth.seed},
               {"nodes", all.nodes()},
               {"train_rows", train.rows()},
               {"test_rows", test.rows()}});
}

void cmd_learn(const RunConfig& c, std::ostream& out) {
    const auto train = resolve_train(c);
    const auto model = build_pca_model(train, c.contribution_ratio, c.alpha_warning);
    const auto scheme = fit_discretization(train, c.K_states);
    const auto states = discretize(train, scheme);
    const auto network = learn_static(states, c.max_parents);
    const auto transition = learn_transition(states, c.max_parents);

    write_text_file(c.output / "pca_model.json", to_json(PcaArtifact{train.node_ids(), model}));
    write_text_file(c.output / "static_network.json", to_json(StaticNetworkArtifact{train.node_ids(), scheme, network}));
    write_text_file(c.output / "transition_network.json",
                    to_json(TransitionNetworkArtifact{train.node_ids(), scheme, transition}));
    emit(out, {{"command", "learn"},
               {"nodes", train.nodes()},
               {"training_rows", train.rows()},
               {"k", model.k},
               {"q_limit", std::isfinite(model.q_limit) ? json(model.q_limit) : json(nullptr)},
               {"t2_limit", model.t2_limit},
               {"static_edges", network.dag.edge_count()},
               {"static_score", penalized_score(states, network.dag, Lag::Same)},
               {"transition_edges", transition.dag.edge_count()},
               {"transition_score", penalized_score(states, transition.dag, Lag::Previous)}});
}

void cmd_inject(const RunConfig& c, std::ostream& out) {
    const auto pca = pca_artifact_from_json(read_text_file(artifact(c, "pca_model.json")));
    const auto test = resolve_test(c);
    require_same_nodes(pca.node_ids, test.node_ids());
    const auto rows = last_rows(test.rows(), c.error_rows);
    const auto& means = pca.model.standardization.means;
    const auto corrupted = inject_errors(test, rows, c.error_pct, means);
    save_csv(c.output / "test_injected.csv", corrupted);

    json cells = json::array();
    for (const auto r : rows)
        for (std::size_t j = 0; j < test.nodes(); ++j)
            cells.push_back({{"row", r}, {"node", test.node_ids()[j]}, {"delta", means[j] * c.error_pct}});
    const json sidecar = {{"format", "sensorprep.injection/1"},
                          {"error_pct", c.error_pct},
                          {"node_ids", test.node_ids()},
                          {"test_rows", test.rows()},
                          {"rows", rows},
                          {"cells", cells}};
    write_text_file(c.output / "injection.json", sidecar.dump(1) + "\n");
    emit(out, {{"command", "inject"}, {"rows", rows.size()}, {"error_pct", c.error_pct}});
}

void cmd_detect(const RunConfig& c, std::ostream& out) {
    const auto pca = pca_artifact_from_json(read_text_file(artifact(c, "pca_model.json")));
    const auto tn = transition_network_from_json(read_text_file(artifact(c, "transition_network.json")));
    require_same_nodes(pca.node_ids, tn.node_ids);
    const auto train = resolve_train(c);
    const auto test = resolve_test(c);
    require_same_nodes(pca.node_ids, train.node_ids());
    require_same_nodes(pca.node_ids, test.node_ids());
    const auto seed = train.row(train.rows() - 1);

    json summary = {{"command", "detect"}, {"rows", test.rows()}};
    for (const auto& [alpha, stem] : {std::pair{c.alpha_warning, "detection"}, std::pair{c.alpha_alarm, "detection_alarm"}}) {
        PcaModel model = pca.model;
        const auto limits = control_limits(model, alpha);
        model.alpha = alpha;
        model.q_limit = limits.q_limit;
        model.t2_limit = limits.t2_limit;
        const auto report = tqbayes_detect(test, seed, model, tn.network, tn.scheme);
        write_text_file(c.output / fmt::format("{}.json", stem), to_json(report, test.node_ids()));
        write_csv_file(c.output / fmt::format("{}.csv", stem),
                       [&](std::ostream& s) { write_detection_csv(s, report, test.node_ids()); });
        std::size_t flagged = 0, abnormal = 0;
        for (const auto& r : report.rows) {
            flagged += r.screen.flagged();
            for (const auto& v : r.verdicts) abnormal += v.abnormal;
        }
        summary[stem] = {{"alpha", alpha}, {"flagged_rows", flagged}, {"abnormal_cells", abnormal}};
    }
    emit(out, summary);
}

void cmd_redundancy_static(const RunConfig& c, std::ostream& out) {
    const auto data = resolve_series(c);
    const auto scheme = fit_discretization(data, c.K_states);
    const auto network = learn_static(discretize(data, scheme), c.max_parents);
    const auto report = ssdrda(network.dag, network.cpts, c.tau);
    const auto recovery = recover_static(data, network.dag, report);
    write_text_file(c.output / "redundancy_static.json", to_json(report, data.node_ids()));
    write_csv_file(c.output / "redundancy_static.csv",
                   [&](std::ostream& s) { write_static_redundancy_csv(s, report, data.node_ids()); });
    write_csv_file(c.output / "recovery_static.csv",
                   [&](std::ostream& s) { write_recovery_csv(s, recovery, data.node_ids()); });
    json redundant = json::array();
    for (const auto& v : report.nodes)
        if (v.redundant) redundant.push_back(data.node_ids()[v.node]);
    emit(out, {{"command", "redundancy-static"}, {"tau", c.tau}, {"redundant", redundant}});
}

void cmd_redundancy_realtime(const RunConfig& c, std::ostream& out) {
    const auto data = resolve_series(c);
    const ScheduleOptions options{c.slice_len, c.train_frac, c.tau, c.max_parents};
    const auto train_len = training_length(options);
    if (train_len < 2 || train_len > data.rows()) {
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("training window of {} rows does not fit {} samples", train_len, data.rows()));
    }
    // Bins come from the first training window, the only data known before any node sleeps.
    const auto scheme = fit_discretization(data.slice_rows(0, train_len), c.K_states);
    const auto report = rsdrda_schedule(data, scheme, options);
    write_text_file(c.output / "redundancy_realtime.json", to_json(report, data.node_ids()));
    write_csv_file(c.output / "schedule.csv", [&](std::ostream& s) { write_schedule_csv(s, report, data.node_ids()); });
    write_csv_file(c.output / "recovery_realtime.csv",
                   [&](std::ostream& s) { write_recovery_csv(s, report.recovery, data.node_ids()); });
    std::size_t sleeping = 0;
    for (const auto& e : report.steps) sleeping += e.state == NodeState::Sleeping;
    emit(out, {{"command", "redundancy-realtime"},
               {"slices", report.slices.size()},
               {"steps", report.steps.size()},
               {"sleeping_steps", sleeping}});
}

namespace {

using Cell = std::pair<std::size_t, std::size_t>;

struct Truth {
    std::set<std::size_t> rows;
    std::set<Cell> cells;
};

Truth read_truth(const fs::path& path, std::span<const std::string> ids) {
    const auto j = [&] {
        try {
            return json::parse(read_text_file(path));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::Parse, fmt::format("{}: {}", path.string(), e.what()));
        }
    }();
    if (j.value("format", std::string()) != "sensorprep.injection/1") {
        throw Error(ErrorCode::Parse, fmt::format("{} is not an injection sidecar", path.string()));
    }
    try {
        require_same_nodes(ids, j.at("node_ids").get<std::vector<std::string>>());
        Truth t;
        for (const auto& r : j.at("rows")) t.rows.insert(r.get<std::size_t>());
        for (const auto& cell : j.at("cells")) {
            const auto id = cell.at("node").get<std::string>();
            const auto it = std::ranges::find(ids, id);
            if (it == ids.end()) throw Error(ErrorCode::SchemaMismatch, fmt::format("unknown node '{}' in sidecar", id));
            t.cells.emplace(cell.at("row").get<std::size_t>(), static_cast<std::size_t>(it - ids.begin()));
        }
        return t;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, fmt::format("{}: {}", path.string(), e.what()));
    }
}

json detection_metrics(const DetectionReport& report, std::size_t nodes, const Truth& truth) {
    std::set<std::size_t> rows, tq_rows, q_rows, t2_rows;
    std::set<Cell> cells, tq_cells, bayes_cells;
    for (const auto& r : report.rows) {
        rows.insert(r.row);
        for (std::size_t j = 0; j < nodes; ++j) cells.emplace(r.row, j);
        if (r.screen.q_exceeded) q_rows.insert(r.row);
        if (r.screen.t2_exceeded) t2_rows.insert(r.row);
        if (!r.screen.flagged()) continue;
        tq_rows.insert(r.row);
        for (std::size_t j = 0; j < nodes; ++j) tq_cells.emplace(r.row, j);
        for (const auto& v : r.verdicts)
            if (v.abnormal) bayes_cells.emplace(r.row, v.node);
    }
    return {{"alpha", report.alpha},
            {"rows",
             {{"tq", pr_json(precision_recall(truth.rows, tq_rows, rows))},
              {"q_only", pr_json(precision_recall(truth.rows, q_rows, rows))},
              {"t2_only", pr_json(precision_recall(truth.rows, t2_rows, rows))}}},
            {"cells",
             {{"tq", pr_json(precision_recall(truth.cells, tq_cells, cells))},
              {"tqbayes", pr_json(precision_recall(truth.cells, bayes_cells, cells))}}}};
}

// Per-node RMSE from a recovery CSV (t,node,estimate,actual,abs_error).
json recovery_metrics(const fs::path& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    std::getline(in, line);
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> per_node;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::istringstream fields(line);
        for (std::string cell; std::getline(fields, cell, ',');) f.push_back(cell);
        if (f.size() != 5) {
            throw Error(ErrorCode::Parse, fmt::format("{}: line {} has {} fields", path.string(), line_no, f.size()));
        }
        try {
            per_node[f[1]].first.push_back(std::stod(f[3]));
            per_node[f[1]].second.push_back(std::stod(f[2]));
        } catch (const std::exception&) {
            throw Error(ErrorCode::Parse, fmt::format("{}: line {} is not numeric", path.string(), line_no));
        }
    }
    json nodes = json::object();
    std::vector<double> values;
    for (const auto& [id, series] : per_node) {
        values.push_back(rmse(series.first, series.second));
        nodes[id] = {{"rmse", values.back()}, {"samples", series.first.size()}};
    }
    return {{"nodes", nodes}, {"mean_rmse", values.empty() ? json(nullptr) : json(mean_rmse(values))}};
}

} // namespace

void cmd_evaluate(const RunConfig& c, std::ostream& out) {
    json metrics = {{"format", "sensorprep.metrics/1"},
                    {"empty_denominator_convention",
                     "precision and recall are 1 when there was nothing to find, else 0"}};
    json summary = {{"command", "evaluate"}};
    const auto detection_path = c.output / "detection.json";
    if (fs::exists(detection_path)) {
        const auto report = detection_report_from_json(read_text_file(detection_path));
        const auto ids = nlohmann::json::parse(read_text_file(detection_path)).at("node_ids").get<std::vector<std::string>>();
        const auto truth = read_truth(c.output / "injection.json", ids);
        metrics["detection"] = detection_metrics(report, ids.size(), truth);
        const auto alarm_path = c.output / "detection_alarm.json";
        if (fs::exists(alarm_path)) {
            metrics["detection_alarm"] =
                detection_metrics(detection_report_from_json(read_text_file(alarm_path)), ids.size(), truth);
        }
        summary["row_recall"] = metrics["detection"]["rows"]["tq"]["recall"];
        summary["row_precision"] = metrics["detection"]["rows"]["tq"]["precision"];
    }
    for (const auto& [file, key] : {std::pair{"recovery_static.csv", "recovery_static"},
                                    std::pair{"recovery_realtime.csv", "recovery_realtime"}}) {
        if (fs::exists(c.output / file)) {
            metrics[key] = recovery_metrics(c.output / file);
            summary[std::string(key) + "_mean_rmse"] = metrics[key]["mean_rmse"];
        }
    }
    if (metrics.size() == 2) {
        throw Error(ErrorCode::Io, fmt::format("nothing to evaluate in '{}'; run detect or a redundancy command first",
                                               c.output.string()));
    }
    write_text_file(c.output / "metrics.json", metrics.dump(1) + "\n");
    emit(out, summary);
}

} // namespace sensorprep::cli
