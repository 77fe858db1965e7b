#pragma once

#include <algorithm>
#include <cstddef>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "graph.hpp"
#include "random.hpp"

// Test-graph families. Cycles C_k (k >= 6), stars, paths and trees are
// admissible; subdivide() turns any simple graph into one of girth >= 9
// (or a forest).
namespace calabi_graph::generators {

inline WeightedGraph cycle(std::size_t k) {
    if (k < 3) throw std::invalid_argument("cycle needs at least 3 vertices");
    std::vector<Edge> e;
    for (std::size_t i = 0; i < k; ++i) e.push_back({i, (i + 1) % k});
    return WeightedGraph::unweighted(k, std::move(e));
}

/// K_{1,leaves}: vertex 0 is the center.
inline WeightedGraph star(std::size_t leaves) {
    if (leaves < 1) throw std::invalid_argument("star needs at least one leaf");
    std::vector<Edge> e;
    for (std::size_t i = 1; i <= leaves; ++i) e.push_back({0, i});
    return WeightedGraph::unweighted(leaves + 1, std::move(e));
}

/// Path on `vertices` vertices (P_n).
inline WeightedGraph path(std::size_t vertices) {
    if (vertices < 2) throw std::invalid_argument("path needs at least 2 vertices");
    std::vector<Edge> e;
    for (std::size_t i = 0; i + 1 < vertices; ++i) e.push_back({i, i + 1});
    return WeightedGraph::unweighted(vertices, std::move(e));
}

/// Attaches a new leaf to vertex `at`; the new edge is appended last.
inline WeightedGraph add_pendant(const WeightedGraph& g, VertexId at, double weight = 1.0) {
    if (at >= g.vertex_count()) throw std::invalid_argument("pendant anchor out of range");
    auto edges = g.edges();
    auto w = g.weights();
    auto labels = g.labels();
    const VertexId leaf = g.vertex_count();
    edges.push_back({at, leaf});
    w.push_back(weight);
    std::string label = std::to_string(leaf);
    while (std::find(labels.begin(), labels.end(), label) != labels.end()) label += "'";
    labels.push_back(std::move(label));
    return WeightedGraph(leaf + 1, std::move(edges), std::move(w), std::move(labels));
}

/// Uniform random recursive tree: vertex i attaches to a uniform earlier vertex.
inline WeightedGraph random_tree(std::size_t vertices, CounterRng& rng) {
    if (vertices < 2) throw std::invalid_argument("tree needs at least 2 vertices");
    std::vector<Edge> e;
    for (std::size_t i = 1; i < vertices; ++i) e.push_back({static_cast<VertexId>(rng.below(i)), i});
    return WeightedGraph::unweighted(vertices, std::move(e));
}

/// Connected simple graph: a random tree plus up to `extra_edges` random chords.
inline WeightedGraph random_connected(std::size_t vertices, std::size_t extra_edges, CounterRng& rng) {
    const auto tree = random_tree(vertices, rng);
    std::vector<Edge> e = tree.edges();
    std::set<std::pair<VertexId, VertexId>> present;
    for (const auto& [u, v] : e) present.insert(std::minmax(u, v));
    const std::size_t max_edges = vertices * (vertices - 1) / 2;
    for (std::size_t attempt = 0; attempt < 20 * extra_edges + 20 && e.size() < max_edges; ++attempt) {
        if (e.size() >= tree.edge_count() + extra_edges) break;
        const auto u = static_cast<VertexId>(rng.below(vertices));
        const auto v = static_cast<VertexId>(rng.below(vertices));
        if (u == v || !present.insert(std::minmax(u, v)).second) continue;
        e.push_back({u, v});
    }
    return WeightedGraph::unweighted(vertices, std::move(e));
}

/// Replaces every edge by a path of `pieces` edges; cycle lengths scale by `pieces`.
inline WeightedGraph subdivide(const WeightedGraph& g, std::size_t pieces = 3) {
    if (pieces < 1) throw std::invalid_argument("subdivision needs at least one piece");
    std::vector<Edge> e;
    VertexId next = g.vertex_count();
    for (const auto& [u, v] : g.edges()) {
        VertexId prev = u;
        for (std::size_t k = 1; k < pieces; ++k) {
            e.push_back({prev, next});
            prev = next++;
        }
        e.push_back({prev, v});
    }
    return WeightedGraph::unweighted(next, std::move(e));
}

/// n log-weights drawn uniformly from [lo, hi].
inline std::vector<double> random_log_weights(std::size_t n, double lo, double hi, CounterRng& rng) {
    std::vector<double> r(n);
    for (auto& x : r) x = rng.uniform(lo, hi);
    return r;
}

/**
 * Random admissible graph with at most `max_edges` edges: a cycle C_k (k >= 6),
 * a random tree, a star, or a 3-subdivision of a random connected graph.
 */
inline WeightedGraph random_admissible(std::size_t max_edges, CounterRng& rng) {
    if (max_edges < 6) throw std::invalid_argument("random_admissible needs max_edges >= 6");
    switch (rng.below(4)) {
        case 0:
            return cycle(6 + rng.below(max_edges - 5));
        case 1:
            return random_tree(2 + rng.below(max_edges), rng);
        case 2:
            return star(1 + rng.below(std::min<std::size_t>(max_edges, 40)));
        default: {
            // 3 * (v - 1 + extra) <= max_edges
            const std::size_t budget = max_edges / 3;
            const std::size_t v = 2 + rng.below(std::max<std::size_t>(1, std::min<std::size_t>(budget, 20) - 1));
            const std::size_t extra = budget > v - 1 ? rng.below(budget - (v - 1) + 1) : 0;
            return subdivide(random_connected(v, extra, rng), 3);
        }
    }
}

}  // namespace calabi_graph::generators
