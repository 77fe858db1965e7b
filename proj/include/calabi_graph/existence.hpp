#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "curvature.hpp"
#include "flows.hpp"
#include "graph.hpp"

namespace calabi_graph {

/// Non-negative rational kept in lowest terms; compared by cross-multiplication.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
        if (d <= 0) throw std::invalid_argument("rational denominator must be positive");
        const auto g = std::gcd(num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    friend bool operator==(const Rational& a, const Rational& b) { return a.num == b.num && a.den == b.den; }
    friend bool operator<(const Rational& a, const Rational& b) { return a.num * b.den < b.num * a.den; }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }

    std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
};

/**
 * Verdict on constant-curvature existence: weights with kappa = average on
 * every edge exist iff max over nonempty proper subsets W of |E(W)|/|W| is
 * strictly below |E|/|V|.
 */
struct DensityCertificate {
    bool exists = false;
    std::vector<VertexId> witness;
    Rational max_density;
    Rational threshold;
    std::string method;
};

namespace detail {

inline std::size_t induced_edges(const WeightedGraph& g, const std::vector<char>& in) {
    std::size_t count = 0;
    for (const auto& e : g.edges()) count += (in[e.u] && in[e.v]) ? 1 : 0;
    return count;
}

inline DensityCertificate finish_certificate(const WeightedGraph& g, Rational best, std::vector<VertexId> witness,
                                             std::string method) {
    DensityCertificate c;
    c.max_density = best;
    c.threshold = Rational(static_cast<std::int64_t>(g.edge_count()), static_cast<std::int64_t>(g.vertex_count()));
    c.exists = best < c.threshold;
    std::sort(witness.begin(), witness.end());
    c.witness = std::move(witness);
    c.method = std::move(method);
    return c;
}

/// Dinic's algorithm on an integer-capacity network.
class MaxFlow {
public:
    static constexpr std::int64_t infinite = std::numeric_limits<std::int64_t>::max() / 4;

    explicit MaxFlow(std::size_t nodes) : head_(nodes, -1), level_(nodes), iter_(nodes) {}

    void add_arc(std::size_t from, std::size_t to, std::int64_t cap) {
        arcs_.push_back({to, head_[from], cap});
        head_[from] = static_cast<int>(arcs_.size() - 1);
        arcs_.push_back({from, head_[to], 0});
        head_[to] = static_cast<int>(arcs_.size() - 1);
    }

    std::int64_t run(std::size_t source, std::size_t sink) {
        std::int64_t total = 0;
        while (bfs(source, sink)) {
            for (std::size_t v = 0; v < head_.size(); ++v) iter_[v] = head_[v];
            while (const std::int64_t pushed = dfs(source, sink, infinite)) total += pushed;
        }
        return total;
    }

    /// Nodes reachable from source in the residual network after run().
    std::vector<char> source_side(std::size_t source) const {
        std::vector<char> seen(head_.size(), 0);
        std::vector<std::size_t> stack{source};
        seen[source] = 1;
        while (!stack.empty()) {
            const auto v = stack.back();
            stack.pop_back();
            for (int a = head_[v]; a != -1; a = arcs_[static_cast<std::size_t>(a)].next) {
                const auto& arc = arcs_[static_cast<std::size_t>(a)];
                if (arc.cap > 0 && !seen[arc.to]) {
                    seen[arc.to] = 1;
                    stack.push_back(arc.to);
                }
            }
        }
        return seen;
    }

private:
    struct Arc {
        std::size_t to;
        int next;
        std::int64_t cap;
    };

    bool bfs(std::size_t source, std::size_t sink) {
        std::fill(level_.begin(), level_.end(), -1);
        std::queue<std::size_t> q;
        level_[source] = 0;
        q.push(source);
        while (!q.empty()) {
            const auto v = q.front();
            q.pop();
            for (int a = head_[v]; a != -1; a = arcs_[static_cast<std::size_t>(a)].next) {
                const auto& arc = arcs_[static_cast<std::size_t>(a)];
                if (arc.cap > 0 && level_[arc.to] < 0) {
                    level_[arc.to] = level_[v] + 1;
                    q.push(arc.to);
                }
            }
        }
        return level_[sink] >= 0;
    }

    std::int64_t dfs(std::size_t v, std::size_t sink, std::int64_t limit) {
        if (v == sink) return limit;
        for (int& a = iter_[v]; a != -1; a = arcs_[static_cast<std::size_t>(a)].next) {
            auto& arc = arcs_[static_cast<std::size_t>(a)];
            if (arc.cap > 0 && level_[arc.to] == level_[v] + 1) {
                const std::int64_t got = dfs(arc.to, sink, std::min(limit, arc.cap));
                if (got > 0) {
                    arc.cap -= got;
                    arcs_[static_cast<std::size_t>(a) ^ 1U].cap += got;
                    return got;
                }
            }
        }
        return 0;
    }

    std::vector<Arc> arcs_;
    std::vector<int> head_;
    std::vector<int> level_;
    std::vector<int> iter_;
};

/**
 * Densest-subgraph network for the subgraph on `allowed` vertices and the
 * guess a/b: source -> edge node (b), edge node -> both endpoints (inf),
 * vertex -> sink (a). The min cut equals b m - max_W (b |E(W)| - a |W|).
 */
struct DensityProbe {
    const WeightedGraph& g;
    const std::vector<char>& allowed;
    std::vector<EdgeId> inner_edges;

    DensityProbe(const WeightedGraph& graph, const std::vector<char>& mask) : g(graph), allowed(mask) {
        for (EdgeId i = 0; i < g.edge_count(); ++i) {
            const auto& e = g.edge(i);
            if (allowed[e.u] && allowed[e.v]) inner_edges.push_back(i);
        }
    }

    /// max_W (b |E(W)| - a |W|) over subsets of the allowed vertices, and a maximizer.
    std::int64_t surplus(const Rational& guess, std::vector<VertexId>* maximizer = nullptr) const {
        const std::size_t m = inner_edges.size();
        const std::size_t nv = g.vertex_count();
        const std::size_t source = m + nv;
        const std::size_t sink = source + 1;
        MaxFlow net(sink + 1);
        for (std::size_t k = 0; k < m; ++k) {
            const auto& e = g.edge(inner_edges[k]);
            net.add_arc(source, k, guess.den);
            net.add_arc(k, m + e.u, MaxFlow::infinite);
            net.add_arc(k, m + e.v, MaxFlow::infinite);
        }
        for (VertexId x = 0; x < nv; ++x) {
            if (allowed[x]) net.add_arc(m + x, sink, guess.num);
        }
        const std::int64_t cut = net.run(source, sink);
        if (maximizer) {
            const auto side = net.source_side(source);
            maximizer->clear();
            for (VertexId x = 0; x < nv; ++x) {
                if (allowed[x] && side[m + x]) maximizer->push_back(x);
            }
        }
        return guess.den * static_cast<std::int64_t>(m) - cut;
    }

    bool denser_than(const Rational& guess) const { return surplus(guess) > 0; }
};

}  // namespace detail

/// Largest enumerable vertex count for the brute-force oracle.
inline constexpr std::size_t bruteforce_vertex_limit = 22;

/**
 * Exact maximum of |E(W)|/|W| over all nonempty proper vertex subsets by
 * enumeration. Ties go to the smallest subset, then the lexicographically
 * smallest sorted vertex list.
 */
inline DensityCertificate max_density_bruteforce(const WeightedGraph& g) {
    const std::size_t nv = g.vertex_count();
    if (nv < 2) throw GraphError("density criterion needs at least 2 vertices");
    if (nv > bruteforce_vertex_limit) {
        throw GraphError("graph has " + std::to_string(nv) + " vertices; enumeration is limited to " +
                         std::to_string(bruteforce_vertex_limit));
    }
    const std::uint32_t full = (1U << nv) - 1U;
    Rational best(-1, 1);
    std::vector<VertexId> best_set;
    std::vector<char> in(nv);
    std::vector<VertexId> members;
    for (std::uint32_t mask = 1; mask < full; ++mask) {
        members.clear();
        for (VertexId x = 0; x < nv; ++x) {
            in[x] = (mask >> x) & 1U;
            if (in[x]) members.push_back(x);
        }
        const Rational d(static_cast<std::int64_t>(detail::induced_edges(g, in)),
                         static_cast<std::int64_t>(members.size()));
        const bool better = best < d || (d == best && (members.size() < best_set.size() ||
                                                       (members.size() == best_set.size() && members < best_set)));
        if (better) {
            best = d;
            best_set = members;
        }
    }
    return detail::finish_certificate(g, best, std::move(best_set), "bruteforce");
}

/**
 * Same criterion via Goldberg's reduction. A proper subset misses some vertex
 * v, so the maximum is taken over the densest subgraphs of G - v; each is
 * found by binary search over the candidate densities a/b (b <= |V| - 1,
 * a <= |E|) with a min-cut test, skipping v whose subgraph cannot beat the
 * best value found so far. The witness is the source side of the final cut.
 */
inline DensityCertificate max_density_maxflow(const WeightedGraph& g) {
    const std::size_t nv = g.vertex_count();
    if (nv < 2) throw GraphError("density criterion needs at least 2 vertices");
    const auto max_edges = static_cast<std::int64_t>(g.edge_count());

    std::vector<Rational> candidates;
    for (std::int64_t b = 1; b < static_cast<std::int64_t>(nv); ++b) {
        for (std::int64_t a = 0; a <= std::min(max_edges, b * (b - 1) / 2); ++a) candidates.emplace_back(a, b);
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    Rational best(0, 1);
    std::vector<VertexId> witness{0};
    std::vector<char> allowed(nv, 1);
    bool have_positive = false;
    for (VertexId skip = 0; skip < nv; ++skip) {
        std::fill(allowed.begin(), allowed.end(), 1);
        allowed[skip] = 0;
        const detail::DensityProbe probe(g, allowed);
        if (probe.inner_edges.empty() || !probe.denser_than(best)) continue;
        // smallest candidate c > best with nothing denser than c
        auto lo = std::upper_bound(candidates.begin(), candidates.end(), best);
        auto hi = candidates.end() - 1;
        while (lo < hi) {
            auto mid = lo + (hi - lo) / 2;
            if (probe.denser_than(*mid)) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        const Rational found = *lo;
        // Everything denser than the predecessor candidate has density exactly `found`.
        const Rational below = *(lo - 1);
        std::vector<VertexId> set;
        probe.surplus(below, &set);
        best = found;
        witness = std::move(set);
        have_positive = true;
    }
    if (!have_positive) witness = {0};
    return detail::finish_certificate(g, best, std::move(witness), "maxflow");
}

struct ConsistencyReport {
    bool consistent = true;
    std::string message;
};

/**
 * Checks a constant-target flow against the existence verdict: convergence
 * is expected exactly when the certificate says constant-curvature weights
 * exist. Disagreement is reported, not thrown.
 */
inline ConsistencyReport certify_flow_consistency(const WeightedGraph& g, const DensityCertificate& cert,
                                                  const FlowRun& run) {
    const CurvatureVector expected = constant_target(g);
    if (run.target.size() != expected.size() || (run.target - expected).cwiseAbs().maxCoeff() > 1e-12) {
        throw std::invalid_argument("flow run did not use the constant average-curvature target");
    }
    const bool converged = run.status == FlowStatus::Converged;
    ConsistencyReport rep;
    if (cert.exists && !converged) {
        rep.consistent = false;
        rep.message = "constant-curvature weights exist but the flow ended " + to_string(run.status) +
                      " at t = " + std::to_string(run.t_final) + "; t_max or tolerances may be too tight";
    } else if (!cert.exists && converged) {
        rep.consistent = false;
        rep.message = "no constant-curvature weights exist but the flow reported convergence";
    } else {
        rep.message = cert.exists ? "exists and converged" : "does not exist and did not converge";
    }
    return rep;
}

inline nlohmann::json to_json(const DensityCertificate& c, const WeightedGraph& g) {
    std::vector<std::string> witness;
    for (VertexId x : c.witness) witness.push_back(g.labels()[x]);
    return {{"exists", c.exists},
            {"max_density", {{"num", c.max_density.num}, {"den", c.max_density.den}}},
            {"threshold", {{"num", c.threshold.num}, {"den", c.threshold.den}}},
            {"witness", witness},
            {"method", c.method}};
}

}  // namespace calabi_graph
