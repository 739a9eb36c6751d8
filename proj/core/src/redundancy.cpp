#include "sensorprep/redundancy.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "sensorprep/error.hpp"

namespace sensorprep {

namespace {

void check_tau(double tau) {
    if (!(tau > 0.0 && tau <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("tau {} outside (0, 1]", tau));
    }
}

std::vector<double> point_mass(State s, int state_count) {
    std::vector<double> p(static_cast<std::size_t>(state_count), 0.0);
    p[static_cast<std::size_t>(s - 1)] = 1.0;
    return p;
}

} // namespace

StaticRedundancyReport ssdrda(const Dag& dag, std::span<const Cpt> cpts, double tau) {
    check_tau(tau);
    if (cpts.size() != dag.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("{} CPTs for a graph of {} nodes", cpts.size(), dag.size()));
    }
    StaticRedundancyReport report;
    report.tau = tau;
    for (std::size_t i = 0; i < dag.size(); ++i) {
        const auto& cpt = cpts[i];
        if (cpt.node != i || cpt.parents != dag.parents(i)) {
            throw Error(ErrorCode::SchemaMismatch, fmt::format("CPT {} does not match the graph's parents", i));
        }
        StaticNodeVerdict v;
        v.node = i;
        if (!cpt.parents.empty()) {
            double sum = 0.0;
            for (std::size_t h = 0; h < cpt.configurations(); ++h) {
                const auto row = cpt.row(h);
                v.row_maxima.push_back(*std::ranges::max_element(row));
                sum += v.row_maxima.back();
            }
            v.criterion = sum / static_cast<double>(cpt.configurations());
            v.redundant = v.criterion >= tau;
        }
        report.nodes.push_back(std::move(v));
    }
    return report;
}

std::vector<double> rsdrda_infer(std::size_t node, const TransitionNetwork& network,
                                 std::span<const std::vector<double>> parent_evidence) {
    if (node >= network.cpts.size()) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("node {} not in the transition network", node));
    }
    const auto& cpt = network.cpts[node];
    const int k = cpt.state_count();
    if (cpt.parents.empty()) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("node {} has no transition parents", node));
    }
    if (parent_evidence.size() != cpt.parents.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("{} evidence vectors for {} parents", parent_evidence.size(), cpt.parents.size()));
    }
    for (const auto& e : parent_evidence) {
        if (e.size() != static_cast<std::size_t>(k)) {
            throw Error(ErrorCode::DimensionMismatch, "evidence vector length differs from the state count");
        }
        for (const double x : e)
            if (!(x >= 0.0)) throw Error(ErrorCode::InvalidArgument, "evidence probabilities must be >= 0");
    }

    std::vector<double> posterior(static_cast<std::size_t>(k), 0.0);
    for (std::size_t h = 0; h < cpt.configurations(); ++h) {
        const auto config = configuration_states(h, cpt.parents.size(), k);
        double weight = 1.0;
        for (std::size_t m = 0; m < config.size(); ++m) weight *= parent_evidence[m][static_cast<std::size_t>(config[m] - 1)];
        if (weight == 0.0) continue;
        const auto row = cpt.row(h);
        for (std::size_t s = 0; s < posterior.size(); ++s) posterior[s] += row[s] * weight;
    }
    double sum = 0.0;
    for (const double p : posterior) sum += p;
    if (!(sum > 0.0)) throw Error(ErrorCode::InvalidArgument, "parent evidence carries no probability mass");
    for (auto& p : posterior) p /= sum;
    return posterior;
}

double recover(std::span<const double> parent_values, std::span<const double> dissimilarities) {
    if (parent_values.empty()) throw Error(ErrorCode::InvalidArgument, "recover: no parents");
    if (parent_values.size() != dissimilarities.size()) {
        throw Error(ErrorCode::DimensionMismatch, "recover: one dissimilarity per parent value required");
    }
    double weighted = 0.0;
    double weight_sum = 0.0;
    for (std::size_t k = 0; k < parent_values.size(); ++k) {
        const double d = dissimilarities[k];
        if (!(d >= 0.0) || !std::isfinite(d)) {
            throw Error(ErrorCode::InvalidArgument, fmt::format("recover: invalid dissimilarity {}", d));
        }
        if (d == 0.0) return parent_values[k];
        weighted += parent_values[k] / d;
        weight_sum += 1.0 / d;
    }
    return weighted / weight_sum;
}

double dissimilarity(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || a.size() != b.size()) {
        throw Error(ErrorCode::DimensionMismatch, "dissimilarity: sequences must be nonempty and equally long");
    }
    double ss = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(ss / static_cast<double>(a.size()));
}

std::vector<RecoveredValue> recover_static(const SensorDataset& data, const Dag& dag,
                                           const StaticRedundancyReport& report) {
    if (dag.size() != data.nodes() || report.nodes.size() != data.nodes()) {
        throw Error(ErrorCode::SchemaMismatch, "recover_static: graph, report and data disagree on node count");
    }
    const auto z = standardize(data).values;
    std::vector<RecoveredValue> out;
    for (const auto& verdict : report.nodes) {
        if (!verdict.redundant) continue;
        const auto& parents = dag.parents(verdict.node);
        const auto own = z.column(verdict.node);
        std::vector<double> d;
        for (const auto p : parents) d.push_back(dissimilarity(own, z.column(p)));
        std::vector<double> values(parents.size());
        for (std::size_t t = 0; t < data.rows(); ++t) {
            for (std::size_t k = 0; k < parents.size(); ++k) values[k] = data.values()(t, parents[k]);
            out.push_back({t, verdict.node, recover(values, d), data.values()(t, verdict.node)});
        }
    }
    std::ranges::sort(out, [](const RecoveredValue& a, const RecoveredValue& b) {
        return std::pair(a.row, a.node) < std::pair(b.row, b.node);
    });
    return out;
}

std::size_t training_length(const ScheduleOptions& options) {
    if (!(options.train_frac > 0.0 && options.train_frac <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("train_frac {} outside (0, 1]", options.train_frac));
    }
    return static_cast<std::size_t>(std::llround(static_cast<double>(options.slice_len) * options.train_frac));
}

namespace {

std::vector<double> zscores(std::vector<double> x) {
    double mean = 0.0;
    for (const double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (const double v : x) ss += (v - mean) * (v - mean);
    const double sd = x.size() > 1 ? std::sqrt(ss / static_cast<double>(x.size() - 1)) : 0.0;
    const double scale = sd > 0.0 ? sd : 1.0;
    for (auto& v : x) v = (v - mean) / scale;
    return x;
}

// RMS difference between a node at t and a parent at t-1 over rows
// [begin, end), each side standardized over the pairs it contributes.
double lagged_dissimilarity(const SensorDataset& data, std::size_t begin, std::size_t end, std::size_t node,
                            std::size_t parent) {
    std::vector<double> own, lagged;
    for (std::size_t t = begin + 1; t < end; ++t) {
        own.push_back(data.values()(t, node));
        lagged.push_back(data.values()(t - 1, parent));
    }
    return dissimilarity(zscores(std::move(own)), zscores(std::move(lagged)));
}

} // namespace

RealtimeReport rsdrda_schedule(const SensorDataset& data, const DiscretizationScheme& scheme,
                               const ScheduleOptions& options) {
    check_tau(options.tau);
    const std::size_t train_len = training_length(options);
    if (train_len < 2) {
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("training window of {} samples is too short (need 2)", train_len));
    }
    if (train_len > options.slice_len) {
        throw Error(ErrorCode::InvalidArgument, "slice is shorter than its training portion");
    }
    if (data.rows() < options.slice_len) {
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("{} samples do not fill one slice of {}", data.rows(), options.slice_len));
    }
    const auto states = discretize(data, scheme);
    const std::size_t n = data.nodes();
    const int k = scheme.state_count();

    RealtimeReport report;
    report.options = options;
    report.train_len = train_len;

    for (std::size_t begin = 0; begin < data.rows(); begin += options.slice_len) {
        const std::size_t end = std::min(begin + options.slice_len, data.rows());
        const std::size_t train_end = begin + train_len;
        if (end <= train_end) break;

        const auto network = learn_transition(states.slice_rows(begin, train_end), options.max_parents);
        std::vector<std::vector<double>> distances(n);
        for (std::size_t i = 0; i < n; ++i)
            for (const auto p : network.cpts[i].parents)
                distances[i].push_back(lagged_dissimilarity(data, begin, train_end, i, p));

        report.slices.push_back({begin, train_end, end, network.dag});

        // What the network knows about row t-1: who slept, their beliefs and values.
        std::vector<bool> slept(n, false);
        std::vector<std::vector<double>> belief(n);
        std::vector<double> value(data.row(train_end - 1).begin(), data.row(train_end - 1).end());

        for (std::size_t t = train_end; t < end; ++t) {
            std::vector<bool> sleeping(n, false);
            std::vector<std::vector<double>> next_belief(n);
            std::vector<double> next_value(data.row(t).begin(), data.row(t).end());
            for (std::size_t i = 0; i < n; ++i) {
                const auto& cpt = network.cpts[i];
                ScheduleEntry entry;
                entry.row = t;
                entry.node = i;
                if (cpt.parents.empty()) {
                    entry.posterior = network.priors[i];
                } else {
                    std::vector<std::vector<double>> evidence;
                    std::vector<double> parent_values;
                    for (const auto p : cpt.parents) {
                        evidence.push_back(slept[p] ? belief[p] : point_mass(states(t - 1, p), k));
                        parent_values.push_back(value[p]);
                    }
                    entry.inferable = true;
                    entry.posterior = rsdrda_infer(i, network, evidence);
                    if (*std::ranges::max_element(entry.posterior) >= options.tau) {
                        entry.state = NodeState::Sleeping;
                        sleeping[i] = true;
                        next_belief[i] = entry.posterior;
                        next_value[i] = recover(parent_values, distances[i]);
                        report.recovery.push_back({t, i, next_value[i], data.values()(t, i)});
                    }
                }
                entry.max_posterior = *std::ranges::max_element(entry.posterior);
                report.steps.push_back(std::move(entry));
            }
            slept = std::move(sleeping);
            belief = std::move(next_belief);
            value = std::move(next_value);
        }
    }
    return report;
}

} // namespace sensorprep
