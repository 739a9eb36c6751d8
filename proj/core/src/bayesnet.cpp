#include "sensorprep/bayesnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "sensorprep/error.hpp"

namespace sensorprep {

// ---------------------------------------------------------------------------
// Dag

Dag::Dag(std::size_t nodes) : parents_(nodes) {}

Dag::Dag(std::vector<std::vector<std::size_t>> parents) : parents_(std::move(parents)) {
    for (std::size_t child = 0; child < parents_.size(); ++child) {
        auto& pa = parents_[child];
        for (const auto p : pa) {
            if (p >= parents_.size()) {
                throw Error(ErrorCode::InvalidArgument, fmt::format("parent {} of node {} out of range", p, child));
            }
            if (p == child) throw Error(ErrorCode::InvalidArgument, fmt::format("self-loop on node {}", child));
        }
        std::ranges::sort(pa);
        pa.erase(std::unique(pa.begin(), pa.end()), pa.end());
    }
}

std::size_t Dag::edge_count() const noexcept {
    std::size_t count = 0;
    for (const auto& pa : parents_) count += pa.size();
    return count;
}

bool Dag::has_edge(std::size_t parent, std::size_t child) const {
    return std::ranges::binary_search(parents_.at(child), parent);
}

void Dag::add_edge(std::size_t parent, std::size_t child) {
    if (parent >= size() || child >= size()) throw Error(ErrorCode::InvalidArgument, "edge endpoint out of range");
    if (parent == child) throw Error(ErrorCode::InvalidArgument, fmt::format("self-loop on node {}", child));
    auto& pa = parents_[child];
    const auto it = std::ranges::lower_bound(pa, parent);
    if (it == pa.end() || *it != parent) pa.insert(it, parent);
}

void Dag::remove_edge(std::size_t parent, std::size_t child) {
    auto& pa = parents_.at(child);
    const auto it = std::ranges::lower_bound(pa, parent);
    if (it != pa.end() && *it == parent) pa.erase(it);
}

std::optional<std::vector<std::size_t>> Dag::topological_order() const {
    const std::size_t n = size();
    std::vector<std::size_t> indegree(n);
    std::vector<std::vector<std::size_t>> children(n);
    for (std::size_t c = 0; c < n; ++c) {
        indegree[c] = parents_[c].size();
        for (const auto p : parents_[c]) children[p].push_back(c);
    }
    std::vector<std::size_t> ready;
    for (std::size_t i = n; i-- > 0;)
        if (indegree[i] == 0) ready.push_back(i);
    std::vector<std::size_t> order;
    while (!ready.empty()) {
        const auto v = ready.back();
        ready.pop_back();
        order.push_back(v);
        for (const auto c : children[v])
            if (--indegree[c] == 0) ready.push_back(c);
    }
    if (order.size() != n) return std::nullopt;
    return order;
}

std::optional<std::vector<std::pair<std::size_t, std::size_t>>> Dag::find_cycle() const {
    const std::size_t n = size();
    std::vector<std::vector<std::size_t>> children(n);
    for (std::size_t c = 0; c < n; ++c)
        for (const auto p : parents_[c]) children[p].push_back(c);

    enum class Mark { White, Grey, Black };
    std::vector<Mark> mark(n, Mark::White);
    std::vector<std::size_t> path;

    struct Frame {
        std::size_t node;
        std::size_t next_child;
    };
    for (std::size_t root = 0; root < n; ++root) {
        if (mark[root] != Mark::White) continue;
        std::vector<Frame> stack{{root, 0}};
        mark[root] = Mark::Grey;
        path.assign(1, root);
        while (!stack.empty()) {
            auto& top = stack.back();
            if (top.next_child < children[top.node].size()) {
                const auto c = children[top.node][top.next_child++];
                if (mark[c] == Mark::Grey) {
                    const auto start = std::ranges::find(path, c);
                    std::vector<std::pair<std::size_t, std::size_t>> cycle;
                    for (auto it = start; it != path.end(); ++it) {
                        const auto next = (it + 1 == path.end()) ? c : *(it + 1);
                        cycle.emplace_back(*it, next);
                    }
                    return cycle;
                }
                if (mark[c] == Mark::White) {
                    mark[c] = Mark::Grey;
                    path.push_back(c);
                    stack.push_back({c, 0});
                }
            } else {
                mark[top.node] = Mark::Black;
                path.pop_back();
                stack.pop_back();
            }
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Counting and estimation

std::int64_t CountTable::row_total(std::size_t config) const {
    std::int64_t total = 0;
    for (int k = 0; k < state_count; ++k) total += at(config, k);
    return total;
}

std::int64_t CountTable::total() const {
    std::int64_t sum = 0;
    for (const auto c : cells) sum += c;
    return sum;
}

std::size_t configuration_count(std::size_t parent_count, int state_count) {
    std::size_t h = 1;
    for (std::size_t i = 0; i < parent_count; ++i) {
        if (h > (std::size_t{1} << 24) / static_cast<std::size_t>(state_count)) {
            throw Error(ErrorCode::InvalidArgument,
                        fmt::format("{} parents with {} states is too many configurations", parent_count, state_count));
        }
        h *= static_cast<std::size_t>(state_count);
    }
    return h;
}

std::size_t configuration_index(std::span<const State> parent_states, int state_count) {
    std::size_t index = 0;
    for (const auto s : parent_states) {
        index = index * static_cast<std::size_t>(state_count) + static_cast<std::size_t>(s - 1);
    }
    return index;
}

std::vector<State> configuration_states(std::size_t index, std::size_t parent_count, int state_count) {
    std::vector<State> states(parent_count);
    const auto k = static_cast<std::size_t>(state_count);
    for (std::size_t i = parent_count; i-- > 0;) {
        states[i] = static_cast<State>(index % k) + 1;
        index /= k;
    }
    return states;
}

CountTable count_states(std::span<const StateMatrix> sequences, std::size_t node,
                        std::span<const std::size_t> parents, Lag lag) {
    if (sequences.empty()) throw Error(ErrorCode::InvalidArgument, "count_states: no sequences");
    const std::size_t n = sequences.front().cols();
    const int k = sequences.front().state_count();
    for (const auto& s : sequences) {
        if (s.cols() != n || s.state_count() != k) {
            throw Error(ErrorCode::DimensionMismatch, "count_states: sequences disagree on shape or state count");
        }
        if (lag == Lag::Previous && s.rows() < 2) {
            throw Error(ErrorCode::InvalidArgument, "count_states: transition counts need at least 2 rows");
        }
    }
    if (node >= n) throw Error(ErrorCode::InvalidArgument, fmt::format("node {} out of range", node));
    for (std::size_t i = 0; i < parents.size(); ++i) {
        if (parents[i] >= n) throw Error(ErrorCode::InvalidArgument, fmt::format("parent {} out of range", parents[i]));
        if (lag == Lag::Same && parents[i] == node) {
            throw Error(ErrorCode::InvalidArgument, fmt::format("node {} cannot be its own same-slice parent", node));
        }
        for (std::size_t j = 0; j < i; ++j)
            if (parents[j] == parents[i])
                throw Error(ErrorCode::InvalidArgument, fmt::format("parent {} listed twice", parents[i]));
    }

    CountTable table;
    table.state_count = k;
    table.configurations = configuration_count(parents.size(), k);
    table.cells.assign(table.configurations * static_cast<std::size_t>(k), 0);
    const std::size_t offset = lag == Lag::Previous ? 1 : 0;
    for (const auto& seq : sequences) {
        for (std::size_t t = offset; t < seq.rows(); ++t) {
            const auto parent_row = seq.row(t - offset);
            std::size_t config = 0;
            for (const auto p : parents) {
                config = config * static_cast<std::size_t>(k) + static_cast<std::size_t>(parent_row[p] - 1);
            }
            ++table.cells[config * static_cast<std::size_t>(k) + static_cast<std::size_t>(seq(t, node) - 1)];
        }
    }
    return table;
}

CountTable count_states(const StateMatrix& states, std::size_t node, std::span<const std::size_t> parents, Lag lag) {
    return count_states(std::span<const StateMatrix>(&states, 1), node, parents, lag);
}

std::vector<double> estimate_table(const CountTable& counts) {
    const auto k = static_cast<std::size_t>(counts.state_count);
    std::vector<double> table(counts.cells.size());
    for (std::size_t j = 0; j < counts.configurations; ++j) {
        const auto total = counts.row_total(j);
        for (std::size_t s = 0; s < k; ++s) {
            if (counts.cells[j * k + s] < 0) throw Error(ErrorCode::InvalidArgument, "negative count");
            table[j * k + s] = total > 0 ? static_cast<double>(counts.cells[j * k + s]) / static_cast<double>(total)
                                         : 1.0 / static_cast<double>(k);
        }
    }
    return table;
}

Cpt estimate_cpt(std::size_t node, std::vector<std::size_t> parents, CountTable counts) {
    if (counts.configurations != configuration_count(parents.size(), counts.state_count) ||
        counts.cells.size() != counts.configurations * static_cast<std::size_t>(counts.state_count)) {
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("count table shape does not match {} parents for node {}", parents.size(), node));
    }
    Cpt cpt;
    cpt.node = node;
    cpt.parents = std::move(parents);
    cpt.table = estimate_table(counts);
    cpt.counts = std::move(counts);
    return cpt;
}

double log_likelihood(const CountTable& counts) {
    double ll = 0.0;
    for (std::size_t j = 0; j < counts.configurations; ++j) {
        const auto total = counts.row_total(j);
        if (total == 0) continue;
        for (int s = 0; s < counts.state_count; ++s) {
            const auto n = counts.at(j, s);
            if (n > 0) ll += static_cast<double>(n) * std::log(static_cast<double>(n) / static_cast<double>(total));
        }
    }
    return ll;
}

double complexity_penalty(const CountTable& counts) {
    const auto samples = counts.total();
    if (samples <= 1) return 0.0;
    const double free_parameters =
        static_cast<double>(counts.configurations) * static_cast<double>(counts.state_count - 1);
    return 0.5 * free_parameters * std::log(static_cast<double>(samples));
}

double family_score(const CountTable& counts) {
    return log_likelihood(counts) - complexity_penalty(counts);
}

namespace {

template <typename FamilyTerm>
double sum_families(std::span<const StateMatrix> sequences, const Dag& dag, Lag lag, FamilyTerm term) {
    if (sequences.empty()) throw Error(ErrorCode::InvalidArgument, "score: no sequences");
    if (dag.size() != sequences.front().cols()) {
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("graph has {} nodes, data has {}", dag.size(), sequences.front().cols()));
    }
    double total = 0.0;
    for (std::size_t i = 0; i < dag.size(); ++i) total += term(count_states(sequences, i, dag.parents(i), lag));
    return total;
}

bool improves(double candidate, double current) {
    return candidate > current + 1e-9 * std::max(1.0, std::abs(current));
}

bool ties(double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

} // namespace

double score(std::span<const StateMatrix> sequences, const Dag& dag, Lag lag) {
    return sum_families(sequences, dag, lag, [](const CountTable& c) { return log_likelihood(c); });
}

double score(const StateMatrix& states, const Dag& dag, Lag lag) {
    return score(std::span<const StateMatrix>(&states, 1), dag, lag);
}

double penalized_score(std::span<const StateMatrix> sequences, const Dag& dag, Lag lag) {
    return sum_families(sequences, dag, lag, [](const CountTable& c) { return family_score(c); });
}

double penalized_score(const StateMatrix& states, const Dag& dag, Lag lag) {
    return penalized_score(std::span<const StateMatrix>(&states, 1), dag, lag);
}

// ---------------------------------------------------------------------------
// Structure search

Dag greedy_parent_sets(std::span<const StateMatrix> sequences, std::size_t max_parents, Lag lag) {
    if (sequences.empty()) throw Error(ErrorCode::InvalidArgument, "structure search: no sequences");
    const std::size_t n = sequences.front().cols();
    std::vector<std::vector<std::size_t>> parents(n);
    for (std::size_t node = 0; node < n; ++node) {
        auto& chosen = parents[node];
        double current = family_score(count_states(sequences, node, chosen, lag));
        while (chosen.size() < max_parents) {
            double best = -std::numeric_limits<double>::infinity();
            std::size_t best_candidate = n;
            for (std::size_t c = 0; c < n; ++c) {
                if (c == node || std::ranges::binary_search(chosen, c)) continue;
                auto trial = chosen;
                trial.insert(std::ranges::lower_bound(trial, c), c);
                const double s = family_score(count_states(sequences, node, trial, lag));
                if (s > best) {
                    best = s;
                    best_candidate = c;
                }
            }
            if (best_candidate == n || !improves(best, current)) break;
            chosen.insert(std::ranges::lower_bound(chosen, best_candidate), best_candidate);
            current = best;
        }
    }
    return Dag(std::move(parents));
}

Dag repair_cycles(Dag dag, std::span<const StateMatrix> sequences) {
    while (const auto cycle = dag.find_cycle()) {
        std::pair<std::size_t, std::size_t> victim = cycle->front();
        double victim_loss = std::numeric_limits<double>::infinity();
        for (const auto& [parent, child] : *cycle) {
            const auto& pa = dag.parents(child);
            std::vector<std::size_t> reduced;
            std::ranges::copy_if(pa, std::back_inserter(reduced), [&](std::size_t p) { return p != parent; });
            const double loss = family_score(count_states(sequences, child, pa, Lag::Same)) -
                                family_score(count_states(sequences, child, reduced, Lag::Same));
            const bool smaller_key = std::pair(child, parent) < std::pair(victim.second, victim.first);
            if (ties(loss, victim_loss) ? smaller_key : loss < victim_loss) {
                victim = {parent, child};
                victim_loss = loss;
            }
        }
        dag.remove_edge(victim.first, victim.second);
    }
    return dag;
}

Dag repair_cycles(Dag dag, const StateMatrix& states) {
    return repair_cycles(std::move(dag), std::span<const StateMatrix>(&states, 1));
}

Dag k2_search(std::span<const StateMatrix> sequences, std::size_t max_parents, Lag lag) {
    auto dag = greedy_parent_sets(sequences, max_parents, lag);
    // Edges across slices always point forward in time, so the unrolled
    // transition graph cannot contain a cycle.
    if (lag == Lag::Same) dag = repair_cycles(std::move(dag), sequences);
    return dag;
}

Dag k2_search(const StateMatrix& states, std::size_t max_parents, Lag lag) {
    return k2_search(std::span<const StateMatrix>(&states, 1), max_parents, lag);
}

// ---------------------------------------------------------------------------
// Networks

namespace {

std::vector<Cpt> estimate_all(std::span<const StateMatrix> sequences, const Dag& dag, Lag lag) {
    std::vector<Cpt> cpts;
    for (std::size_t i = 0; i < dag.size(); ++i) {
        cpts.push_back(estimate_cpt(i, dag.parents(i), count_states(sequences, i, dag.parents(i), lag)));
    }
    return cpts;
}

} // namespace

BayesianNetwork learn_static(std::span<const StateMatrix> sequences, std::size_t max_parents) {
    BayesianNetwork net;
    net.dag = k2_search(sequences, max_parents, Lag::Same);
    net.cpts = estimate_all(sequences, net.dag, Lag::Same);
    net.state_count = sequences.front().state_count();
    return net;
}

BayesianNetwork learn_static(const StateMatrix& states, std::size_t max_parents) {
    return learn_static(std::span<const StateMatrix>(&states, 1), max_parents);
}

std::vector<std::vector<double>> marginal_priors(std::span<const StateMatrix> sequences) {
    if (sequences.empty()) throw Error(ErrorCode::InvalidArgument, "marginal_priors: no sequences");
    const std::size_t n = sequences.front().cols();
    const int k = sequences.front().state_count();
    std::vector<std::vector<double>> priors(n, std::vector<double>(static_cast<std::size_t>(k), 0.0));
    std::size_t rows = 0;
    for (const auto& seq : sequences) {
        rows += seq.rows();
        for (std::size_t t = 0; t < seq.rows(); ++t)
            for (std::size_t i = 0; i < n; ++i) priors[i][static_cast<std::size_t>(seq(t, i) - 1)] += 1.0;
    }
    for (auto& p : priors)
        for (auto& x : p) x /= static_cast<double>(rows);
    return priors;
}

TransitionNetwork learn_transition(std::span<const StateMatrix> sequences, std::size_t max_parents) {
    if (sequences.empty()) throw Error(ErrorCode::InvalidArgument, "learn_transition: no sequences");
    for (const auto& s : sequences) {
        if (s.rows() < 2) throw Error(ErrorCode::InvalidArgument, "learn_transition: need at least 2 rows");
    }
    TransitionNetwork net;
    net.dag = k2_search(sequences, max_parents, Lag::Previous);
    net.cpts = estimate_all(sequences, net.dag, Lag::Previous);
    net.priors = marginal_priors(sequences);
    net.state_count = sequences.front().state_count();
    return net;
}

TransitionNetwork learn_transition(const StateMatrix& states, std::size_t max_parents) {
    return learn_transition(std::span<const StateMatrix>(&states, 1), max_parents);
}

} // namespace sensorprep
