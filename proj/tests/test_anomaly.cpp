#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles/inference_oracle.hpp"
#include "sensorprep/anomaly.hpp"
#include "sensorprep/error.hpp"
#include "sensorprep/synth.hpp"
#include "support.hpp"

using namespace sensorprep;

namespace {

Cpt cpt_from_counts(std::size_t node, std::vector<std::size_t> parents, int k, std::vector<std::int64_t> cells) {
    CountTable c;
    c.state_count = k;
    c.configurations = configuration_count(parents.size(), k);
    c.cells = std::move(cells);
    return estimate_cpt(node, std::move(parents), std::move(c));
}

TransitionNetwork single_node_network(Cpt child_cpt, std::size_t n, int k, std::vector<double> prior) {
    TransitionNetwork tn;
    tn.state_count = k;
    std::vector<std::vector<std::size_t>> parents(n);
    parents[child_cpt.node] = child_cpt.parents;
    tn.dag = Dag(parents);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == child_cpt.node) {
            tn.cpts.push_back(child_cpt);
        } else {
            tn.cpts.push_back(cpt_from_counts(i, {}, k, std::vector<std::int64_t>(static_cast<std::size_t>(k), 1)));
        }
        tn.priors.push_back(i == child_cpt.node ? prior : std::vector<double>(static_cast<std::size_t>(k), 1.0 / k));
    }
    return tn;
}

// Random transition network: parents drawn among the other nodes, random counts
// (some rows left empty so the smoothing path is exercised).
TransitionNetwork random_network(std::mt19937_64& rng) {
    const std::size_t n = 2 + rng() % 3;
    const int k = 2 + static_cast<int>(rng() % 2);
    std::uniform_int_distribution<int> count(0, 6);
    std::bernoulli_distribution pick(0.5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    TransitionNetwork tn;
    tn.state_count = k;
    std::vector<std::vector<std::size_t>> parents(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < n; ++p)
            if (p != i && pick(rng)) parents[i].push_back(p);
    tn.dag = Dag(parents);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::int64_t> cells(configuration_count(parents[i].size(), k) * static_cast<std::size_t>(k));
        for (auto& c : cells) c = count(rng);
        tn.cpts.push_back(cpt_from_counts(i, parents[i], k, cells));
        std::vector<double> prior(static_cast<std::size_t>(k));
        double z = 0.0;
        for (auto& p : prior) z += p = u(rng) + 0.01;
        for (auto& p : prior) p /= z;
        tn.priors.push_back(prior);
    }
    return tn;
}

} // namespace

TEST(Predict, IdentityCopy) {
    const auto cpt = cpt_from_counts(1, {0}, 3, {5, 0, 0, 0, 5, 0, 0, 0, 5});
    const auto tn = single_node_network(cpt, 2, 3, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    const std::vector<State> prev{2, 1};
    const auto p = nb_predict_state(1, prev, tn);
    EXPECT_TRUE(p.inferable);
    EXPECT_EQ(p.predicted, 2);
    EXPECT_EQ(p.posterior, (std::vector<double>{0.0, 1.0, 0.0}));
}

TEST(Predict, UniformTiesGoToLowestState) {
    const auto cpt = cpt_from_counts(1, {0}, 2, {1, 1, 1, 1});
    const auto tn = single_node_network(cpt, 2, 2, {0.5, 0.5});
    const std::vector<State> prev{1, 1};
    const auto p = nb_predict_state(1, prev, tn);
    EXPECT_EQ(p.predicted, 1);
    EXPECT_EQ(p.posterior, (std::vector<double>{0.5, 0.5}));
}

TEST(Predict, TwoParentsHandExample) {
    // Single-parent factors at A=1 and B=1 work out to [0.9, 0.1] and [0.8, 0.2].
    const auto cpt = cpt_from_counts(2, {0, 1}, 2, {4, 0, 5, 1, 4, 2, 1, 1});
    EXPECT_EQ(single_parent_conditional(cpt, 0, 1), (std::vector<double>{0.9, 0.1}));
    EXPECT_EQ(single_parent_conditional(cpt, 1, 1), (std::vector<double>{0.8, 0.2}));
    const auto tn = single_node_network(cpt, 3, 2, {0.5, 0.5});
    const std::vector<State> prev{1, 1, 2};
    const auto p = nb_predict_state(2, prev, tn);
    EXPECT_NEAR(p.posterior[0], 36.0 / 37.0, 1e-15);
    EXPECT_NEAR(p.posterior[1], 1.0 / 37.0, 1e-15);
    EXPECT_EQ(p.predicted, 1);
}

TEST(Predict, ParentlessNodeIsUninferable) {
    const auto cpt = cpt_from_counts(1, {0}, 2, {1, 0, 0, 1});
    auto tn = single_node_network(cpt, 2, 2, {0.5, 0.5});
    tn.priors[0] = {0.3, 0.7};
    const std::vector<State> prev{1, 1};
    const auto p = nb_predict_state(0, prev, tn);
    EXPECT_FALSE(p.inferable);
    EXPECT_EQ(p.predicted, 2);
}

TEST(Predict, MatchesBruteForceOnRandomNetworks) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const auto tn = random_network(rng);
        const std::size_t n = tn.dag.size();
        std::vector<State> states(n);
        std::uniform_int_distribution<int> s(1, tn.state_count);
        for (auto& x : states) x = s(rng);
        for (std::size_t i = 0; i < n; ++i) {
            const auto got = nb_predict_state(i, states, tn);
            double z = 0.0;
            for (const double p : got.posterior) z += p;
            EXPECT_NEAR(z, 1.0, 1e-12);
            if (tn.cpts[i].parents.empty()) continue;
            std::vector<int> pa;
            for (const auto p : tn.cpts[i].parents) pa.push_back(states[p]);
            const auto want = oracle::naive_bayes(tn.cpts[i], tn.priors[i], pa);
            for (std::size_t c = 0; c < want.size(); ++c) EXPECT_NEAR(got.posterior[c], want[c], 1e-12);
            EXPECT_EQ(static_cast<std::size_t>(got.predicted - 1), oracle::argmax_lowest(got.posterior));
        }
    }
}

TEST(Predict, Rejections) {
    const auto cpt = cpt_from_counts(1, {0}, 2, {1, 0, 0, 1});
    const auto tn = single_node_network(cpt, 2, 2, {0.5, 0.5});
    const std::vector<State> short_row{1};
    EXPECT_THROW(nb_predict_state(1, short_row, tn), Error);
    const std::vector<State> prev{1, 1};
    EXPECT_THROW(nb_predict_state(5, prev, tn), Error);
}

namespace {

struct Fixture {
    SensorDataset train;
    SensorDataset test;
    PcaModel model;
    TransitionNetwork network;
    DiscretizationScheme scheme;
};

Fixture copy_child_fixture() {
    SynthProfile profile;
    profile.kind = SynthKind::CopyChild;
    const auto all = synth_generate(17, 600, 6, profile);
    auto train = all.slice_rows(0, 400);
    auto test = all.slice_rows(400, 600);
    auto model = build_pca_model(train);
    auto scheme = fit_discretization(train);
    auto network = learn_transition(discretize(train, scheme));
    return {std::move(train), std::move(test), std::move(model), std::move(network), std::move(scheme)};
}

} // namespace

TEST(Screen, MeanRowIsQuiet) {
    const auto f = copy_child_fixture();
    const auto r = tq_screen(f.model.standardization.means, f.model);
    EXPECT_NEAR(r.q, 0.0, 1e-20);
    EXPECT_NEAR(r.t2, 0.0, 1e-20);
    EXPECT_FALSE(r.flagged());
}

TEST(Detect, VerdictsOnlyForFlaggedRows) {
    const auto f = copy_child_fixture();
    const auto report = tqbayes_detect(f.test, f.train.row(f.train.rows() - 1), f.model, f.network, f.scheme);
    ASSERT_EQ(report.rows.size(), f.test.rows());
    for (const auto& r : report.rows) {
        EXPECT_EQ(r.verdicts.empty(), !r.screen.flagged());
        for (const auto& v : r.verdicts) {
            if (!v.inferable) EXPECT_FALSE(v.abnormal);
            else EXPECT_EQ(v.abnormal, v.observed != v.predicted);
        }
    }
}

TEST(Detect, CorruptedChildIsLocalized) {
    const auto f = copy_child_fixture();
    const std::size_t child = 5;
    const double shift = 3.0 * std::sqrt(f.model.standardization.variances[child]);
    const auto states = discretize(f.test, f.scheme);
    // Rows where the clean data is predicted perfectly and the child can move up a bin.
    std::size_t checked = 0;
    for (std::size_t row = 1; row < f.test.rows(); ++row) {
        if (states(row, child) == f.scheme.state_count()) continue;
        bool clean_ok = true;
        for (std::size_t i = 0; i < f.test.nodes(); ++i) {
            const auto p = nb_predict_state(i, states.row(row - 1), f.network);
            clean_ok = clean_ok && (!p.inferable || p.predicted == states(row, i));
        }
        if (!clean_ok || !nb_predict_state(child, states.row(row - 1), f.network).inferable) continue;
        Matrix values = f.test.values();
        values(row, child) += shift;
        const SensorDataset corrupted(values, f.test.node_ids());
        const auto report = tqbayes_detect(corrupted, f.train.row(f.train.rows() - 1), f.model, f.network, f.scheme);
        const auto& det = report.rows[row];
        if (!det.screen.flagged()) continue;
        for (const auto& v : det.verdicts) EXPECT_EQ(v.abnormal, v.node == child) << "row " << row;
        ++checked;
    }
    EXPECT_GE(checked, 10u);
}

TEST(Detect, IdenticalStatesGiveIdenticalVerdicts) {
    // Shifts that move no sample across a bin edge leave stage two blind.
    const auto f = copy_child_fixture();
    std::vector<double> means = f.model.standardization.means;
    const std::vector<std::size_t> rows = last_rows(f.test.rows(), 50);
    const auto shifted = inject_errors(f.test, rows, 1e-4, means);
    const auto a = discretize(f.test, f.scheme);
    const auto b = discretize(shifted, f.scheme);
    const auto seed = f.train.row(f.train.rows() - 1);
    const auto ra = tqbayes_detect(f.test, seed, f.model, f.network, f.scheme);
    const auto rb = tqbayes_detect(shifted, seed, f.model, f.network, f.scheme);
    for (std::size_t r = 0; r < f.test.rows(); ++r) {
        const bool same_states = std::ranges::equal(a.row(r), b.row(r)) && (r == 0 || std::ranges::equal(a.row(r - 1), b.row(r - 1)));
        if (!same_states || !ra.rows[r].screen.flagged() || !rb.rows[r].screen.flagged()) continue;
        for (std::size_t i = 0; i < ra.rows[r].verdicts.size(); ++i)
            EXPECT_EQ(ra.rows[r].verdicts[i].abnormal, rb.rows[r].verdicts[i].abnormal);
    }
}

TEST(Detect, SchemaMismatch) {
    const auto f = copy_child_fixture();
    const std::vector<double> seed(3, 0.0);
    EXPECT_THROW(tqbayes_detect(f.test, seed, f.model, f.network, f.scheme), Error);
}
