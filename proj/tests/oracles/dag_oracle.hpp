#pragma once

// Exhaustive structure search for tiny graphs. Every directed graph is
// enumerated, cyclic ones are skipped and each family is scored from its own
// counts, so nothing is shared with the library's search or scoring code.

#include <cmath>
#include <cstddef>
#include <algorithm>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "sensorprep/ingest.hpp"

namespace oracle {

using Parents = std::vector<std::vector<std::size_t>>;
using Skeleton = std::set<std::pair<std::size_t, std::size_t>>;

inline bool acyclic(const Parents& parents) {
    const std::size_t n = parents.size();
    std::vector<bool> done(n, false);
    // Repeatedly remove nodes whose parents are all removed.
    for (std::size_t round = 0; round < n; ++round) {
        bool progress = false;
        for (std::size_t v = 0; v < n; ++v) {
            if (done[v]) continue;
            bool ready = true;
            for (const auto p : parents[v]) ready = ready && done[p];
            if (ready) {
                done[v] = true;
                progress = true;
            }
        }
        if (!progress) break;
    }
    for (const bool d : done)
        if (!d) return false;
    return true;
}

inline double family_bic(const sensorprep::StateMatrix& s, std::size_t node, const std::vector<std::size_t>& pa) {
    const int k = s.state_count();
    std::map<std::vector<int>, std::vector<double>> table;
    for (std::size_t r = 0; r < s.rows(); ++r) {
        std::vector<int> key;
        for (const auto p : pa) key.push_back(s(r, p));
        auto& cell = table[key];
        if (cell.empty()) cell.assign(static_cast<std::size_t>(k), 0.0);
        cell[static_cast<std::size_t>(s(r, node) - 1)] += 1.0;
    }
    double ll = 0.0;
    for (const auto& [key, cell] : table) {
        double total = 0.0;
        for (const double c : cell) total += c;
        for (const double c : cell)
            if (c > 0.0) ll += c * std::log(c / total);
    }
    const double configurations = std::pow(static_cast<double>(k), static_cast<double>(pa.size()));
    return ll - 0.5 * configurations * (k - 1) * std::log(static_cast<double>(s.rows()));
}

inline double bic(const sensorprep::StateMatrix& s, const Parents& parents) {
    double total = 0.0;
    for (std::size_t v = 0; v < parents.size(); ++v) total += family_bic(s, v, parents[v]);
    return total;
}

struct SearchResult {
    double best = -INFINITY;
    std::vector<Parents> optimal; // every DAG within tolerance of the best score
};

inline SearchResult exhaustive_search(const sensorprep::StateMatrix& s, std::size_t max_parents,
                                      double tolerance = 1e-9) {
    const std::size_t n = s.cols();
    std::vector<std::pair<std::size_t, std::size_t>> slots; // (parent, child)
    for (std::size_t c = 0; c < n; ++c)
        for (std::size_t p = 0; p < n; ++p)
            if (p != c) slots.emplace_back(p, c);
    std::vector<std::pair<double, Parents>> scored;
    for (std::size_t mask = 0; mask < (std::size_t{1} << slots.size()); ++mask) {
        Parents parents(n);
        for (std::size_t b = 0; b < slots.size(); ++b)
            if (mask >> b & 1) parents[slots[b].second].push_back(slots[b].first);
        bool fits = true;
        for (auto& pa : parents) {
            fits = fits && pa.size() <= max_parents;
            std::sort(pa.begin(), pa.end());
        }
        if (!fits || !acyclic(parents)) continue;
        scored.emplace_back(bic(s, parents), std::move(parents));
    }
    SearchResult out;
    for (const auto& [score, g] : scored) out.best = std::max(out.best, score);
    for (auto& [score, g] : scored)
        if (score >= out.best - tolerance * std::max(1.0, std::abs(out.best))) out.optimal.push_back(g);
    return out;
}

inline Skeleton skeleton(const Parents& parents) {
    Skeleton out;
    for (std::size_t c = 0; c < parents.size(); ++c)
        for (const auto p : parents[c]) out.emplace(std::min(p, c), std::max(p, c));
    return out;
}

inline std::size_t count_dags(std::size_t n) {
    std::size_t slots = n * (n - 1);
    std::size_t total = 0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << slots); ++mask) {
        Parents parents(n);
        std::size_t b = 0;
        for (std::size_t c = 0; c < n; ++c)
            for (std::size_t p = 0; p < n; ++p)
                if (p != c) {
                    if (mask >> b & 1) parents[c].push_back(p);
                    ++b;
                }
        if (acyclic(parents)) ++total;
    }
    return total;
}

} // namespace oracle
