#include "sensorprep/anomaly.hpp"

#include <fmt/format.h>

#include "sensorprep/error.hpp"

namespace sensorprep {

ScreenResult tq_screen(std::span<const double> row, const PcaModel& model) {
    const auto z = apply_standardization(row, model.standardization);
    ScreenResult r;
    r.q = q_statistic(z, model);
    r.t2 = t2_statistic(z, model);
    r.q_exceeded = r.q > model.q_limit;
    r.t2_exceeded = r.t2 > model.t2_limit;
    return r;
}

std::vector<double> single_parent_conditional(const Cpt& cpt, std::size_t parent_position, State parent_state) {
    const int k = cpt.state_count();
    if (parent_position >= cpt.parents.size()) {
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("parent position {} but node {} has {} parents", parent_position, cpt.node,
                                cpt.parents.size()));
    }
    if (parent_state < 1 || parent_state > k) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("parent state {} outside 1..{}", parent_state, k));
    }
    std::vector<double> mass(static_cast<std::size_t>(k), 0.0);
    double total = 0.0;
    for (std::size_t h = 0; h < cpt.configurations(); ++h) {
        if (configuration_states(h, cpt.parents.size(), k)[parent_position] != parent_state) continue;
        for (int s = 0; s < k; ++s) {
            const auto n = static_cast<double>(cpt.counts.at(h, s));
            mass[static_cast<std::size_t>(s)] += n;
            total += n;
        }
    }
    for (auto& m : mass) m = total > 0.0 ? m / total : 1.0 / k;
    return mass;
}

namespace {

State argmax_state(const std::vector<double>& p) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < p.size(); ++i)
        if (p[i] > p[best]) best = i;
    return static_cast<State>(best) + 1;
}

bool normalize(std::vector<double>& p) {
    double sum = 0.0;
    for (const double x : p) sum += x;
    if (!(sum > 0.0)) return false;
    for (auto& x : p) x /= sum;
    return true;
}

} // namespace

NodePrediction nb_predict_state(std::size_t node, std::span<const State> previous_states,
                                const TransitionNetwork& network) {
    if (node >= network.dag.size() || node >= network.cpts.size() || node >= network.priors.size()) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("node {} not in the transition network", node));
    }
    if (previous_states.size() != network.dag.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("{} previous states for {} nodes", previous_states.size(), network.dag.size()));
    }
    const auto& cpt = network.cpts[node];
    const auto& prior = network.priors[node];
    NodePrediction out;
    if (cpt.parents.empty()) {
        out.posterior = prior;
        out.predicted = argmax_state(prior);
        return out;
    }
    out.inferable = true;
    std::vector<double> posterior = prior;
    for (std::size_t j = 0; j < cpt.parents.size(); ++j) {
        const auto factor = single_parent_conditional(cpt, j, previous_states[cpt.parents[j]]);
        for (std::size_t c = 0; c < posterior.size(); ++c) posterior[c] *= factor[c];
    }
    // Parents that each rule out every state the others allow leave nothing;
    // fall back to the prior, then to uniform.
    if (!normalize(posterior)) {
        posterior = prior;
        if (!normalize(posterior)) posterior.assign(prior.size(), 1.0 / static_cast<double>(prior.size()));
    }
    out.predicted = argmax_state(posterior);
    out.posterior = std::move(posterior);
    return out;
}

DetectionReport tqbayes_detect(const SensorDataset& test, std::span<const double> predecessor,
                               const PcaModel& model, const TransitionNetwork& network,
                               const DiscretizationScheme& scheme) {
    const std::size_t n = test.nodes();
    if (model.nodes() != n || network.dag.size() != n || scheme.nodes() != n || predecessor.size() != n) {
        throw Error(ErrorCode::SchemaMismatch,
                    fmt::format("artifacts disagree on node count: data {}, model {}, network {}, scheme {}, "
                                "predecessor {}",
                                n, model.nodes(), network.dag.size(), scheme.nodes(), predecessor.size()));
    }
    if (network.state_count != scheme.state_count()) {
        throw Error(ErrorCode::SchemaMismatch, "network and discretization disagree on the state count");
    }
    DetectionReport report;
    report.alpha = model.alpha;
    report.q_limit = model.q_limit;
    report.t2_limit = model.t2_limit;
    report.rows.reserve(test.rows());
    for (std::size_t r = 0; r < test.rows(); ++r) {
        RowDetection det;
        det.row = r;
        det.screen = tq_screen(test.row(r), model);
        if (det.screen.flagged()) {
            const auto previous = discretize_row(r == 0 ? predecessor : test.row(r - 1), scheme);
            const auto observed = discretize_row(test.row(r), scheme);
            for (std::size_t i = 0; i < n; ++i) {
                const auto prediction = nb_predict_state(i, previous, network);
                NodeVerdict v;
                v.node = i;
                v.observed = observed[i];
                v.predicted = prediction.predicted;
                v.inferable = prediction.inferable;
                v.abnormal = prediction.inferable && prediction.predicted != observed[i];
                det.verdicts.push_back(v);
            }
        }
        report.rows.push_back(std::move(det));
    }
    return report;
}

} // namespace sensorprep
