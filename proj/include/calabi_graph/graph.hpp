#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace calabi_graph {

/// Raised for malformed input and for graphs that violate a required precondition.
class GraphError : public std::runtime_error {
public:
    explicit GraphError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    /// 1-based input line, or 0 when the error is not tied to a line.
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

using VertexId = std::size_t;
using EdgeId = std::size_t;

struct Edge {
    VertexId u;
    VertexId v;

    bool touches(VertexId x) const noexcept { return u == x || v == x; }
    VertexId other(VertexId x) const noexcept { return x == u ? v : u; }
};

/// Girth of a graph; std::nullopt encodes an acyclic graph (infinite girth).
using Girth = std::optional<std::size_t>;

struct GraphAudit {
    Girth girth;
    bool connected = false;
    bool admissible = false;

    bool girth_at_least(std::size_t k) const noexcept { return !girth || *girth >= k; }
};

class WeightedGraph;
inline Girth girth(const WeightedGraph& g);

/**
 * Finite simple graph with indexed edges and positive weights.
 *
 * Vertices are dense indices 0..vertex_count()-1; the original input labels
 * are kept for output. Edge i refers to the same vertex pair for the lifetime
 * of the object. The audit (girth, connectivity) is computed once at
 * construction.
 */
class WeightedGraph {
public:
    WeightedGraph() = default;

    WeightedGraph(std::size_t vertex_count, std::vector<Edge> edges, std::vector<double> weights,
                  std::vector<std::string> labels = {})
        : vertex_count_(vertex_count), edges_(std::move(edges)), weights_(std::move(weights)),
          labels_(std::move(labels)) {
        if (weights_.size() != edges_.size()) {
            throw GraphError("weight count " + std::to_string(weights_.size()) +
                             " does not match edge count " + std::to_string(edges_.size()));
        }
        if (labels_.empty()) {
            labels_.reserve(vertex_count_);
            for (std::size_t x = 0; x < vertex_count_; ++x) labels_.push_back(std::to_string(x));
        } else if (labels_.size() != vertex_count_) {
            throw GraphError("label count does not match vertex count");
        }
        incident_.assign(vertex_count_, {});
        std::unordered_map<std::uint64_t, EdgeId> seen;
        for (EdgeId i = 0; i < edges_.size(); ++i) {
            const auto [u, v] = edges_[i];
            if (u >= vertex_count_ || v >= vertex_count_) {
                throw GraphError("edge " + std::to_string(i) + " references a missing vertex");
            }
            if (u == v) throw GraphError("edge " + std::to_string(i) + " is a self-loop");
            const auto key = pair_key(u, v);
            if (!seen.emplace(key, i).second) {
                throw GraphError("edge " + std::to_string(i) + " duplicates edge " +
                                 std::to_string(seen[key]));
            }
            if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i])) {
                throw GraphError("edge " + std::to_string(i) + " has non-positive or non-finite weight");
            }
            incident_[u].push_back(i);
            incident_[v].push_back(i);
        }
        audit_ = compute_audit();
    }

    /// Unit weights on every edge.
    static WeightedGraph unweighted(std::size_t vertex_count, std::vector<Edge> edges) {
        std::vector<double> w(edges.size(), 1.0);
        return WeightedGraph(vertex_count, std::move(edges), std::move(w));
    }

    std::size_t vertex_count() const noexcept { return vertex_count_; }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const Edge& edge(EdgeId i) const { return edges_.at(i); }
    const std::vector<double>& weights() const noexcept { return weights_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const std::vector<EdgeId>& incident(VertexId x) const { return incident_.at(x); }
    std::size_t degree(VertexId x) const { return incident_.at(x).size(); }
    const GraphAudit& audit() const noexcept { return audit_; }

    /// Same topology with a different weight vector.
    WeightedGraph with_weights(std::vector<double> weights) const {
        return WeightedGraph(vertex_count_, edges_, std::move(weights), labels_);
    }

    std::optional<EdgeId> find_edge(VertexId u, VertexId v) const {
        if (u >= vertex_count_) return std::nullopt;
        for (EdgeId i : incident_[u]) {
            if (edges_[i].other(u) == v) return i;
        }
        return std::nullopt;
    }

    friend bool operator==(const WeightedGraph& a, const WeightedGraph& b) {
        if (a.vertex_count_ != b.vertex_count_ || a.edges_.size() != b.edges_.size()) return false;
        for (EdgeId i = 0; i < a.edges_.size(); ++i) {
            if (a.edges_[i].u != b.edges_[i].u || a.edges_[i].v != b.edges_[i].v) return false;
        }
        return a.weights_ == b.weights_ && a.labels_ == b.labels_;
    }

private:
    static std::uint64_t pair_key(VertexId u, VertexId v) {
        if (u > v) std::swap(u, v);
        return (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint64_t>(v);
    }

    GraphAudit compute_audit() const {
        GraphAudit a;
        a.girth = calabi_graph::girth(*this);
        a.connected = is_connected();
        a.admissible = a.connected && a.girth_at_least(6);
        return a;
    }

    bool is_connected() const {
        if (vertex_count_ == 0) return false;
        std::vector<char> seen(vertex_count_, 0);
        std::vector<VertexId> stack{0};
        seen[0] = 1;
        std::size_t reached = 1;
        while (!stack.empty()) {
            const VertexId x = stack.back();
            stack.pop_back();
            for (EdgeId i : incident_[x]) {
                const VertexId y = edges_[i].other(x);
                if (!seen[y]) {
                    seen[y] = 1;
                    ++reached;
                    stack.push_back(y);
                }
            }
        }
        return reached == vertex_count_;
    }

    std::size_t vertex_count_ = 0;
    std::vector<Edge> edges_;
    std::vector<double> weights_;
    std::vector<std::string> labels_;
    std::vector<std::vector<EdgeId>> incident_;
    GraphAudit audit_;
};

/**
 * Shortest cycle length by breadth-first search from every vertex.
 *
 * From a root, the first non-tree edge closing two BFS branches bounds the
 * shortest cycle through that root; the minimum over all roots is exact.
 */
inline Girth girth(const WeightedGraph& g) {
    const std::size_t nv = g.vertex_count();
    constexpr std::size_t unseen = std::numeric_limits<std::size_t>::max();
    std::size_t best = unseen;
    std::vector<std::size_t> dist(nv);
    std::vector<EdgeId> via(nv);
    for (VertexId root = 0; root < nv; ++root) {
        std::fill(dist.begin(), dist.end(), unseen);
        dist[root] = 0;
        via[root] = unseen;
        std::queue<VertexId> queue;
        queue.push(root);
        while (!queue.empty()) {
            const VertexId x = queue.front();
            queue.pop();
            if (2 * dist[x] + 1 >= best) break;
            for (EdgeId i : g.incident(x)) {
                if (i == via[x]) continue;
                const VertexId y = g.edge(i).other(x);
                if (dist[y] == unseen) {
                    dist[y] = dist[x] + 1;
                    via[y] = i;
                    queue.push(y);
                } else {
                    best = std::min(best, dist[x] + dist[y] + 1);
                }
            }
        }
    }
    if (best == unseen) return std::nullopt;
    return best;
}

inline GraphAudit audit(const WeightedGraph& g) { return g.audit(); }

/// Throws unless the graph is connected with girth at least 6.
inline void require_admissible(const WeightedGraph& g) {
    const auto& a = g.audit();
    if (g.edge_count() == 0) throw GraphError("graph has no edges");
    if (!a.connected) throw GraphError("graph is not connected");
    if (!a.girth_at_least(6)) {
        throw GraphError("graph has girth " + std::to_string(*a.girth) + " < 6");
    }
}

/// adjacency[i] lists the edges sharing exactly one endpoint with edge i, ascending.
inline std::vector<std::vector<EdgeId>> edge_adjacency(const WeightedGraph& g) {
    std::vector<std::vector<EdgeId>> adj(g.edge_count());
    for (VertexId x = 0; x < g.vertex_count(); ++x) {
        const auto& inc = g.incident(x);
        for (std::size_t a = 0; a < inc.size(); ++a) {
            for (std::size_t b = a + 1; b < inc.size(); ++b) {
                adj[inc[a]].push_back(inc[b]);
                adj[inc[b]].push_back(inc[a]);
            }
        }
    }
    for (auto& row : adj) std::sort(row.begin(), row.end());
    return adj;
}

// ---------------------------------------------------------------------------
// Edge-list text format
// ---------------------------------------------------------------------------

/**
 * Reads "u v" or "u v w" per line; '#' starts a comment; blank lines are
 * skipped; CRLF is accepted. Vertex tokens are arbitrary labels, remapped to
 * dense ids in order of first appearance. Edge order follows file order.
 */
inline WeightedGraph parse_edge_list(std::istream& in) {
    std::unordered_map<std::string, VertexId> ids;
    std::vector<std::string> labels;
    std::vector<Edge> edges;
    std::vector<double> weights;
    std::unordered_map<std::uint64_t, std::size_t> first_line;

    auto vertex = [&](const std::string& token) {
        auto [it, inserted] = ids.emplace(token, labels.size());
        if (inserted) labels.push_back(token);
        return it->second;
    };

    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        std::istringstream fields(raw);
        std::vector<std::string> tok;
        for (std::string t; fields >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        if (tok.size() < 2 || tok.size() > 3) {
            throw GraphError("expected 'u v' or 'u v w', got " + std::to_string(tok.size()) + " fields",
                             line_no);
        }
        double w = 1.0;
        if (tok.size() == 3) {
            std::size_t used = 0;
            try {
                w = std::stod(tok[2], &used);
            } catch (const std::exception&) {
                throw GraphError("weight '" + tok[2] + "' is not a number", line_no);
            }
            if (used != tok[2].size()) throw GraphError("weight '" + tok[2] + "' is not a number", line_no);
            if (!(w > 0.0) || !std::isfinite(w)) {
                throw GraphError("weight must be positive and finite", line_no);
            }
        }
        if (tok[0] == tok[1]) throw GraphError("self-loop on vertex '" + tok[0] + "'", line_no);
        const VertexId u = vertex(tok[0]);
        const VertexId v = vertex(tok[1]);
        const auto key = u < v ? (static_cast<std::uint64_t>(u) << 32) | v
                               : (static_cast<std::uint64_t>(v) << 32) | u;
        if (auto [it, inserted] = first_line.emplace(key, line_no); !inserted) {
            throw GraphError("duplicate edge " + tok[0] + " " + tok[1] + " (first at line " +
                                 std::to_string(it->second) + ")",
                             line_no);
        }
        edges.push_back({u, v});
        weights.push_back(w);
    }
    const std::size_t nv = labels.size();
    return WeightedGraph(nv, std::move(edges), std::move(weights), std::move(labels));
}

inline WeightedGraph parse_edge_list(const std::string& text) {
    std::istringstream in(text);
    return parse_edge_list(in);
}

/// Writes the edge list with original labels and round-trip precision weights.
inline void write_edge_list(std::ostream& out, const WeightedGraph& g) {
    const auto& labels = g.labels();
    std::ostringstream buf;
    buf.precision(17);
    for (EdgeId i = 0; i < g.edge_count(); ++i) {
        const auto& e = g.edge(i);
        buf << labels[e.u] << ' ' << labels[e.v] << ' ' << g.weights()[i] << '\n';
    }
    out << buf.str();
}

inline std::string to_edge_list(const WeightedGraph& g) {
    std::ostringstream out;
    write_edge_list(out, g);
    return out.str();
}

// ---------------------------------------------------------------------------
// JSON interchange: {"vertices": [labels], "edges": [[u, v], ...], "weights": [...]}
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const WeightedGraph& g) {
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : g.edges()) edges.push_back({e.u, e.v});
    return {{"vertices", g.labels()}, {"edges", std::move(edges)}, {"weights", g.weights()}};
}

inline WeightedGraph graph_from_json(const nlohmann::json& j) {
    try {
        auto labels = j.at("vertices").get<std::vector<std::string>>();
        std::vector<Edge> edges;
        for (const auto& e : j.at("edges")) {
            if (!e.is_array() || e.size() != 2) throw GraphError("edge entries must be [u, v] pairs");
            edges.push_back({e[0].get<VertexId>(), e[1].get<VertexId>()});
        }
        std::vector<double> weights = j.contains("weights") ? j.at("weights").get<std::vector<double>>()
                                                            : std::vector<double>(edges.size(), 1.0);
        const std::size_t nv = labels.size();
        return WeightedGraph(nv, std::move(edges), std::move(weights), std::move(labels));
    } catch (const nlohmann::json::exception& ex) {
        throw GraphError(std::string("malformed graph JSON: ") + ex.what());
    }
}

}  // namespace calabi_graph
