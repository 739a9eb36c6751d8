#include "sensorprep/serialize.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "sensorprep/error.hpp"

namespace sensorprep {

using nlohmann::json;

namespace {

// JSON has no infinity; a disabled limit is stored as null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double read_number(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

json parse(std::string_view text, std::string_view what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, fmt::format("{}: {}", what, e.what()));
    }
}

void expect_format(const json& j, std::string_view format) {
    if (!j.is_object() || j.value("format", std::string()) != format) {
        throw Error(ErrorCode::Parse, fmt::format("document is not a {} artifact", format));
    }
}

template <typename F>
auto guarded(std::string_view what, F&& body) {
    try {
        return body();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, fmt::format("{}: {}", what, e.what()));
    }
}

json scheme_json(const DiscretizationScheme& scheme) {
    return {{"state_count", scheme.state_count()}, {"edges", scheme.all_edges()}};
}

DiscretizationScheme scheme_from(const json& j) {
    return DiscretizationScheme(j.at("edges").get<std::vector<std::vector<double>>>(), j.at("state_count").get<int>());
}

json counts_json(const CountTable& counts) {
    json rows = json::array();
    for (std::size_t h = 0; h < counts.configurations; ++h) {
        json row = json::array();
        for (int s = 0; s < counts.state_count; ++s) row.push_back(counts.at(h, s));
        rows.push_back(std::move(row));
    }
    return rows;
}

json table_json(const Cpt& cpt) {
    json rows = json::array();
    for (std::size_t h = 0; h < cpt.configurations(); ++h) {
        const auto r = cpt.row(h);
        rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    return rows;
}

json families_json(const Dag& dag, std::span<const Cpt> cpts, std::span<const std::string> ids) {
    json nodes = json::array();
    for (std::size_t i = 0; i < dag.size(); ++i) {
        json parent_ids = json::array();
        for (const auto p : dag.parents(i)) parent_ids.push_back(ids[p]);
        nodes.push_back({{"id", ids[i]},
                         {"parents", dag.parents(i)},
                         {"parent_ids", parent_ids},
                         {"counts", counts_json(cpts[i].counts)},
                         {"table", table_json(cpts[i])}});
    }
    return nodes;
}

// The table is re-derived from the counts so a loaded network is always
// internally consistent.
std::pair<Dag, std::vector<Cpt>> families_from(const json& nodes, int state_count) {
    std::vector<std::vector<std::size_t>> parents;
    for (const auto& node : nodes) parents.push_back(node.at("parents").get<std::vector<std::size_t>>());
    Dag dag(parents);
    std::vector<Cpt> cpts;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        CountTable counts;
        counts.state_count = state_count;
        counts.configurations = configuration_count(dag.parents(i).size(), state_count);
        for (const auto& row : nodes[i].at("counts")) {
            const auto cells = row.get<std::vector<std::int64_t>>();
            if (cells.size() != static_cast<std::size_t>(state_count)) {
                throw Error(ErrorCode::Parse, fmt::format("node {}: count row has {} cells", i, cells.size()));
            }
            counts.cells.insert(counts.cells.end(), cells.begin(), cells.end());
        }
        cpts.push_back(estimate_cpt(i, dag.parents(i), std::move(counts)));
    }
    return {std::move(dag), std::move(cpts)};
}

void check_ids(std::span<const std::string> ids, std::size_t n, std::string_view what) {
    if (ids.size() != n) {
        throw Error(ErrorCode::DimensionMismatch, fmt::format("{}: {} node ids for {} nodes", what, ids.size(), n));
    }
}

std::string dump(const json& j) { return j.dump(1) + "\n"; }

} // namespace

std::string format_number(double value) { return fmt::format("{}", value); }

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, fmt::format("cannot write '{}'", path.string()));
    out << text;
    if (!out) throw Error(ErrorCode::Io, fmt::format("write to '{}' failed", path.string()));
}

// ---------------------------------------------------------------------------

std::string to_json(const PcaArtifact& a) {
    const auto& m = a.model;
    check_ids(a.node_ids, m.nodes(), "PCA model");
    json vectors = json::array();
    for (std::size_t r = 0; r < m.eigenvectors.rows(); ++r) {
        const auto row = m.eigenvectors.row(r);
        vectors.push_back(std::vector<double>(row.begin(), row.end()));
    }
    const json j = {{"format", "sensorprep.pca/1"},
                    {"node_ids", a.node_ids},
                    {"means", m.standardization.means},
                    {"variances", m.standardization.variances},
                    {"eigenvalues", m.eigenvalues},
                    {"eigenvectors", vectors},
                    {"k", m.k},
                    {"training_rows", m.training_rows},
                    {"alpha", m.alpha},
                    {"q_limit", number(m.q_limit)},
                    {"t2_limit", number(m.t2_limit)}};
    return dump(j);
}

PcaArtifact pca_artifact_from_json(std::string_view text) {
    const auto j = parse(text, "PCA model");
    expect_format(j, "sensorprep.pca/1");
    return guarded("PCA model", [&] {
        PcaArtifact a;
        a.node_ids = j.at("node_ids").get<std::vector<std::string>>();
        auto& m = a.model;
        m.standardization.means = j.at("means").get<std::vector<double>>();
        m.standardization.variances = j.at("variances").get<std::vector<double>>();
        m.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
        const auto rows = j.at("eigenvectors").get<std::vector<std::vector<double>>>();
        const std::size_t n = m.eigenvalues.size();
        if (a.node_ids.size() != n || m.standardization.means.size() != n ||
            m.standardization.variances.size() != n || rows.size() != n) {
            throw Error(ErrorCode::Parse, "PCA model: inconsistent dimensions");
        }
        m.eigenvectors = Matrix(n, n);
        for (std::size_t r = 0; r < n; ++r) {
            if (rows[r].size() != n) throw Error(ErrorCode::Parse, "PCA model: eigenvector matrix not square");
            for (std::size_t c = 0; c < n; ++c) m.eigenvectors(r, c) = rows[r][c];
        }
        m.k = j.at("k").get<std::size_t>();
        m.training_rows = j.at("training_rows").get<std::size_t>();
        m.alpha = j.at("alpha").get<double>();
        m.q_limit = read_number(j.at("q_limit"));
        m.t2_limit = read_number(j.at("t2_limit"));
        return a;
    });
}

std::string to_json(const StaticNetworkArtifact& a) {
    check_ids(a.node_ids, a.network.dag.size(), "static network");
    const json j = {{"format", "sensorprep.static-network/1"},
                    {"node_ids", a.node_ids},
                    {"state_count", a.network.state_count},
                    {"discretization", scheme_json(a.scheme)},
                    {"edges", a.network.dag.edge_count()},
                    {"nodes", families_json(a.network.dag, a.network.cpts, a.node_ids)}};
    return dump(j);
}

StaticNetworkArtifact static_network_from_json(std::string_view text) {
    const auto j = parse(text, "static network");
    expect_format(j, "sensorprep.static-network/1");
    return guarded("static network", [&] {
        const int k = j.at("state_count").get<int>();
        auto [dag, cpts] = families_from(j.at("nodes"), k);
        StaticNetworkArtifact a{j.at("node_ids").get<std::vector<std::string>>(), scheme_from(j.at("discretization")),
                                BayesianNetwork{std::move(dag), std::move(cpts), k}};
        check_ids(a.node_ids, a.network.dag.size(), "static network");
        return a;
    });
}

std::string to_json(const TransitionNetworkArtifact& a) {
    check_ids(a.node_ids, a.network.dag.size(), "transition network");
    const json j = {{"format", "sensorprep.transition-network/1"},
                    {"node_ids", a.node_ids},
                    {"state_count", a.network.state_count},
                    {"discretization", scheme_json(a.scheme)},
                    {"edges", a.network.dag.edge_count()},
                    {"priors", a.network.priors},
                    {"nodes", families_json(a.network.dag, a.network.cpts, a.node_ids)}};
    return dump(j);
}

TransitionNetworkArtifact transition_network_from_json(std::string_view text) {
    const auto j = parse(text, "transition network");
    expect_format(j, "sensorprep.transition-network/1");
    return guarded("transition network", [&] {
        const int k = j.at("state_count").get<int>();
        auto [dag, cpts] = families_from(j.at("nodes"), k);
        TransitionNetworkArtifact a{j.at("node_ids").get<std::vector<std::string>>(),
                                    scheme_from(j.at("discretization")),
                                    TransitionNetwork{std::move(dag), std::move(cpts),
                                                      j.at("priors").get<std::vector<std::vector<double>>>(), k}};
        check_ids(a.node_ids, a.network.dag.size(), "transition network");
        return a;
    });
}

// ---------------------------------------------------------------------------

std::string to_json(const DetectionReport& report, std::span<const std::string> ids) {
    json rows = json::array();
    for (const auto& r : report.rows) {
        json verdicts = json::array();
        for (const auto& v : r.verdicts) {
            verdicts.push_back({{"node", ids[v.node]},
                                {"observed", v.observed},
                                {"predicted", v.predicted},
                                {"inferable", v.inferable},
                                {"abnormal", v.abnormal}});
        }
        rows.push_back({{"row", r.row},
                        {"q", r.screen.q},
                        {"t2", r.screen.t2},
                        {"q_exceeded", r.screen.q_exceeded},
                        {"t2_exceeded", r.screen.t2_exceeded},
                        {"flagged", r.screen.flagged()},
                        {"verdicts", verdicts}});
    }
    const json j = {{"format", "sensorprep.detection/1"},
                    {"node_ids", std::vector<std::string>(ids.begin(), ids.end())},
                    {"alpha", report.alpha},
                    {"q_limit", number(report.q_limit)},
                    {"t2_limit", number(report.t2_limit)},
                    {"rows", rows}};
    return dump(j);
}

DetectionReport detection_report_from_json(std::string_view text) {
    const auto j = parse(text, "detection report");
    expect_format(j, "sensorprep.detection/1");
    return guarded("detection report", [&] {
        const auto ids = j.at("node_ids").get<std::vector<std::string>>();
        DetectionReport report;
        report.alpha = j.at("alpha").get<double>();
        report.q_limit = read_number(j.at("q_limit"));
        report.t2_limit = read_number(j.at("t2_limit"));
        for (const auto& r : j.at("rows")) {
            RowDetection det;
            det.row = r.at("row").get<std::size_t>();
            det.screen.q = r.at("q").get<double>();
            det.screen.t2 = r.at("t2").get<double>();
            det.screen.q_exceeded = r.at("q_exceeded").get<bool>();
            det.screen.t2_exceeded = r.at("t2_exceeded").get<bool>();
            for (const auto& v : r.at("verdicts")) {
                const auto id = v.at("node").get<std::string>();
                const auto it = std::ranges::find(ids, id);
                if (it == ids.end()) throw Error(ErrorCode::Parse, fmt::format("unknown node '{}' in report", id));
                det.verdicts.push_back({static_cast<std::size_t>(it - ids.begin()), v.at("observed").get<State>(),
                                        v.at("predicted").get<State>(), v.at("inferable").get<bool>(),
                                        v.at("abnormal").get<bool>()});
            }
            report.rows.push_back(std::move(det));
        }
        return report;
    });
}

void write_detection_csv(std::ostream& out, const DetectionReport& report, std::span<const std::string> ids) {
    out << "row,q,t2,flagged,node,observed,predicted,abnormal,inferable\n";
    for (const auto& r : report.rows) {
        const auto prefix = fmt::format("{},{},{},{}", r.row, format_number(r.screen.q), format_number(r.screen.t2),
                                        r.screen.flagged() ? 1 : 0);
        if (r.verdicts.empty()) {
            out << prefix << ",,,,,\n";
            continue;
        }
        for (const auto& v : r.verdicts) {
            out << prefix << ',' << ids[v.node] << ',' << v.observed << ',' << v.predicted << ','
                << (v.abnormal ? 1 : 0) << ',' << (v.inferable ? 1 : 0) << '\n';
        }
    }
}

std::string to_json(const StaticRedundancyReport& report, std::span<const std::string> ids) {
    json nodes = json::array();
    for (const auto& v : report.nodes) {
        nodes.push_back({{"id", ids[v.node]},
                         {"redundant", v.redundant},
                         {"criterion", v.criterion},
                         {"row_maxima", v.row_maxima}});
    }
    const json j = {{"format", "sensorprep.redundancy-static/1"}, {"tau", report.tau}, {"nodes", nodes}};
    return dump(j);
}

void write_static_redundancy_csv(std::ostream& out, const StaticRedundancyReport& report,
                                 std::span<const std::string> ids) {
    out << "node,redundant,criterion\n";
    for (const auto& v : report.nodes) {
        out << ids[v.node] << ',' << (v.redundant ? 1 : 0) << ',' << format_number(v.criterion) << '\n';
    }
}

namespace {

std::string_view state_name(NodeState s) { return s == NodeState::Sleeping ? "sleeping" : "waking"; }

} // namespace

std::string to_json(const RealtimeReport& report, std::span<const std::string> ids) {
    json slices = json::array();
    for (const auto& s : report.slices) {
        json parents = json::object();
        for (std::size_t i = 0; i < s.transitions.size(); ++i) {
            json pa = json::array();
            for (const auto p : s.transitions.parents(i)) pa.push_back(ids[p]);
            parents[ids[i]] = pa;
        }
        slices.push_back({{"begin", s.begin}, {"train_end", s.train_end}, {"end", s.end}, {"parents", parents}});
    }
    json steps = json::array();
    for (const auto& e : report.steps) {
        steps.push_back({{"t", e.row},
                         {"node", ids[e.node]},
                         {"state", state_name(e.state)},
                         {"inferable", e.inferable},
                         {"max_posterior", e.max_posterior},
                         {"posterior", e.posterior}});
    }
    const json j = {{"format", "sensorprep.redundancy-realtime/1"},
                    {"tau", report.options.tau},
                    {"slice_len", report.options.slice_len},
                    {"train_frac", report.options.train_frac},
                    {"train_len", report.train_len},
                    {"max_parents", report.options.max_parents},
                    {"slices", slices},
                    {"steps", steps}};
    return dump(j);
}

void write_schedule_csv(std::ostream& out, const RealtimeReport& report, std::span<const std::string> ids) {
    out << "t,node,state,max_posterior\n";
    for (const auto& e : report.steps) {
        out << e.row << ',' << ids[e.node] << ',' << state_name(e.state) << ',' << format_number(e.max_posterior)
            << '\n';
    }
}

void write_recovery_csv(std::ostream& out, std::span<const RecoveredValue> recovery,
                        std::span<const std::string> ids) {
    out << "t,node,estimate,actual,abs_error\n";
    for (const auto& r : recovery) {
        out << r.row << ',' << ids[r.node] << ',' << format_number(r.estimate) << ',' << format_number(r.actual)
            << ',' << format_number(std::abs(r.estimate - r.actual)) << '\n';
    }
}

} // namespace sensorprep
