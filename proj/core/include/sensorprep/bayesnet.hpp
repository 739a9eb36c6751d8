#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sensorprep/ingest.hpp"

namespace sensorprep {

/// Which slice a family's parents are read from. Same: parents at row t
/// (initial / static network). Previous: parents at row t-1 (transition network).
enum class Lag { Same = 0, Previous = 1 };

/// Directed graph given as one sorted parent list per node. Self-loops are
/// rejected at construction. Acyclicity is a property of learned graphs, not
/// of the type: raw greedy search output may contain cycles until repaired.
class Dag {
public:
    explicit Dag(std::size_t nodes = 0);
    explicit Dag(std::vector<std::vector<std::size_t>> parents);

    std::size_t size() const noexcept { return parents_.size(); }
    const std::vector<std::size_t>& parents(std::size_t node) const { return parents_.at(node); }
    std::size_t edge_count() const noexcept;
    bool has_edge(std::size_t parent, std::size_t child) const;

    void add_edge(std::size_t parent, std::size_t child);
    void remove_edge(std::size_t parent, std::size_t child);

    /// Kahn order; nullopt when the graph has a cycle.
    std::optional<std::vector<std::size_t>> topological_order() const;
    bool is_acyclic() const { return topological_order().has_value(); }

    /// Edges (parent, child) of some directed cycle, in traversal order.
    /// Deterministic: the search starts from the lowest node index.
    std::optional<std::vector<std::pair<std::size_t, std::size_t>>> find_cycle() const;

    friend bool operator==(const Dag&, const Dag&) = default;

private:
    std::vector<std::vector<std::size_t>> parents_;
};

/// N(j, k): how often the node was in state k while its parents were in
/// configuration j. Configurations use mixed radix, first parent most
/// significant.
struct CountTable {
    std::size_t configurations = 1;
    int state_count = 2;
    std::vector<std::int64_t> cells;

    std::int64_t at(std::size_t config, int state_index) const {
        return cells[config * static_cast<std::size_t>(state_count) + static_cast<std::size_t>(state_index)];
    }
    std::int64_t row_total(std::size_t config) const;
    std::int64_t total() const;
};

std::size_t configuration_count(std::size_t parent_count, int state_count);

/// Row index of a joint parent configuration (states are 1-based).
std::size_t configuration_index(std::span<const State> parent_states, int state_count);

/// Inverse of configuration_index.
std::vector<State> configuration_states(std::size_t index, std::size_t parent_count, int state_count);

/// Tallies N over every sequence. With Lag::Previous the node at row t is
/// paired with its parents at row t-1, t = 1..m-1.
CountTable count_states(std::span<const StateMatrix> sequences, std::size_t node,
                        std::span<const std::size_t> parents, Lag lag);
CountTable count_states(const StateMatrix& states, std::size_t node,
                        std::span<const std::size_t> parents, Lag lag);

/// Row-normalized maximum-likelihood estimate; an all-zero row becomes uniform.
std::vector<double> estimate_table(const CountTable& counts);

struct Cpt {
    std::size_t node = 0;
    std::vector<std::size_t> parents;
    CountTable counts;
    std::vector<double> table; // same shape as counts

    int state_count() const noexcept { return counts.state_count; }
    std::size_t configurations() const noexcept { return counts.configurations; }
    std::span<const double> row(std::size_t config) const {
        const auto k = static_cast<std::size_t>(counts.state_count);
        return {table.data() + config * k, k};
    }
};

Cpt estimate_cpt(std::size_t node, std::vector<std::size_t> parents, CountTable counts);

/// Sum of N log theta over the table; empty cells contribute nothing.
double log_likelihood(const CountTable& counts);

/// BIC penalty: free parameters / 2 * log(samples).
double complexity_penalty(const CountTable& counts);

/// Log-likelihood minus the complexity penalty.
double family_score(const CountTable& counts);

/// Unpenalized log-likelihood score of the whole graph for one lag.
double score(std::span<const StateMatrix> sequences, const Dag& dag, Lag lag);
double score(const StateMatrix& states, const Dag& dag, Lag lag);

/// Same with the per-family complexity penalty; the quantity search maximizes.
double penalized_score(std::span<const StateMatrix> sequences, const Dag& dag, Lag lag);
double penalized_score(const StateMatrix& states, const Dag& dag, Lag lag);

inline constexpr std::size_t kDefaultMaxParents = 3;

/// Per-node greedy parent selection with no node ordering. Candidates are
/// every other node; a node is never its own parent. The result may contain
/// cycles for Lag::Same.
Dag greedy_parent_sets(std::span<const StateMatrix> sequences, std::size_t max_parents, Lag lag);

/// greedy_parent_sets followed, for Lag::Same, by repair_cycles.
Dag k2_search(std::span<const StateMatrix> sequences, std::size_t max_parents, Lag lag);
Dag k2_search(const StateMatrix& states, std::size_t max_parents, Lag lag);

/// Breaks cycles one edge at a time, removing the cycle edge whose loss in
/// penalized family score is smallest.
Dag repair_cycles(Dag dag, std::span<const StateMatrix> sequences);
Dag repair_cycles(Dag dag, const StateMatrix& states);

struct BayesianNetwork {
    Dag dag;
    std::vector<Cpt> cpts;
    int state_count = 2;
};

/// Static (same-slice) network: k2_search with cycle repair plus CPTs.
BayesianNetwork learn_static(std::span<const StateMatrix> sequences, std::size_t max_parents = kDefaultMaxParents);
BayesianNetwork learn_static(const StateMatrix& states, std::size_t max_parents = kDefaultMaxParents);

/// Two-slice network: edges read "parent at t-1 -> child at t".
struct TransitionNetwork {
    Dag dag;
    std::vector<Cpt> cpts;
    std::vector<std::vector<double>> priors; // single-slice marginals
    int state_count = 2;
};

TransitionNetwork learn_transition(std::span<const StateMatrix> sequences,
                                   std::size_t max_parents = kDefaultMaxParents);
TransitionNetwork learn_transition(const StateMatrix& states, std::size_t max_parents = kDefaultMaxParents);

/// Per-node state frequencies over every row.
std::vector<std::vector<double>> marginal_priors(std::span<const StateMatrix> sequences);

} // namespace sensorprep
