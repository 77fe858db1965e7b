#include <gtest/gtest.h>

#include <calabi_graph/generators.hpp>
#include <calabi_graph/graph.hpp>

#include "oracles.hpp"

namespace cg = calabi_graph;
namespace gen = calabi_graph::generators;

TEST(ParseEdgeList, DefaultWeightPath) {
    const auto g = cg::parse_edge_list("0 1\n1 2");
    EXPECT_EQ(g.vertex_count(), 3u);
    ASSERT_EQ(g.edge_count(), 2u);
    EXPECT_EQ(g.weights(), (std::vector<double>{1.0, 1.0}));
    EXPECT_EQ(g.edge(0).u, 0u);
    EXPECT_EQ(g.edge(1).v, 2u);
}

TEST(ParseEdgeList, SingleWeightedEdge) {
    const auto g = cg::parse_edge_list("0 1 2.5");
    EXPECT_EQ(g.vertex_count(), 2u);
    ASSERT_EQ(g.edge_count(), 1u);
    EXPECT_DOUBLE_EQ(g.weights()[0], 2.5);
}

TEST(ParseEdgeList, DuplicateEdgeReportsLine) {
    try {
        cg::parse_edge_list("0 1\n0 1");
        FAIL() << "duplicate accepted";
    } catch (const cg::GraphError& ex) {
        EXPECT_EQ(ex.line(), 2u);
        EXPECT_NE(std::string(ex.what()).find("duplicate"), std::string::npos);
    }
    // reversed orientation is the same undirected edge
    EXPECT_THROW(cg::parse_edge_list("a b\nb a\n"), cg::GraphError);
}

TEST(ParseEdgeList, RejectsMalformedInput) {
    auto line_of = [](const std::string& text) {
        try {
            cg::parse_edge_list(text);
        } catch (const cg::GraphError& ex) {
            return ex.line();
        }
        return std::size_t{0};
    };
    EXPECT_EQ(line_of("0 1\n2 2\n"), 2u);          // self-loop
    EXPECT_EQ(line_of("0 1 0\n"), 1u);              // zero weight
    EXPECT_EQ(line_of("# c\n0 1 -3\n"), 2u);        // negative weight
    EXPECT_EQ(line_of("0 1\n1 2 x\n"), 2u);         // weight not a number
    EXPECT_EQ(line_of("0 1\n\n1 2 3.0abc\n"), 3u);  // trailing garbage
    EXPECT_EQ(line_of("0\n"), 1u);                  // too few fields
    EXPECT_EQ(line_of("0 1 1 1\n"), 1u);            // too many fields
    EXPECT_EQ(line_of("0 1 inf\n"), 1u);
    EXPECT_EQ(line_of("0 1 nan\n"), 1u);
}

TEST(ParseEdgeList, CommentsCrlfAndSparseLabels) {
    const auto g = cg::parse_edge_list("# header\r\n100 7 2 # trailing\r\n\r\n7 abc\r\n");
    EXPECT_EQ(g.vertex_count(), 3u);
    EXPECT_EQ(g.labels(), (std::vector<std::string>{"100", "7", "abc"}));
    EXPECT_DOUBLE_EQ(g.weights()[0], 2.0);
    EXPECT_EQ(g.edge(1).u, 1u);
    EXPECT_EQ(g.edge(1).v, 2u);
}

TEST(ParseEdgeList, RoundTripsThroughText) {
    cg::CounterRng rng(11);
    for (int k = 0; k < 50; ++k) {
        auto g = gen::random_admissible(40, rng);
        g = g.with_weights([&] {
            auto w = gen::random_log_weights(g.edge_count(), -3, 3, rng);
            for (auto& x : w) x = std::exp(x);
            return w;
        }());
        // vertex ids are reassigned in order of first appearance, so compare by label
        const auto back = cg::parse_edge_list(cg::to_edge_list(g));
        ASSERT_EQ(back.edge_count(), g.edge_count());
        EXPECT_EQ(back.weights(), g.weights());
        for (cg::EdgeId i = 0; i < g.edge_count(); ++i) {
            EXPECT_EQ(back.labels()[back.edge(i).u], g.labels()[g.edge(i).u]);
            EXPECT_EQ(back.labels()[back.edge(i).v], g.labels()[g.edge(i).v]);
        }
        EXPECT_EQ(cg::parse_edge_list(cg::to_edge_list(back)), back);
    }
}

TEST(GraphJson, RoundTrips) {
    const auto g = cg::parse_edge_list("x y 0.5\ny z 3\n");
    const auto j = cg::to_json(g);
    EXPECT_EQ(j["vertices"], nlohmann::json({"x", "y", "z"}));
    EXPECT_EQ(cg::graph_from_json(j), g);
    EXPECT_EQ(cg::graph_from_json(nlohmann::json::parse(j.dump())), g);
}

TEST(GraphJson, RejectsBadDocuments) {
    EXPECT_THROW(cg::graph_from_json(nlohmann::json::parse(R"({"edges": [[0,1]]})")), cg::GraphError);
    EXPECT_THROW(cg::graph_from_json(nlohmann::json::parse(R"({"vertices": ["a","b"], "edges": [[0]]})")),
                 cg::GraphError);
    EXPECT_THROW(cg::graph_from_json(nlohmann::json::parse(R"({"vertices": ["a","b"], "edges": [[0,5]]})")),
                 cg::GraphError);
    EXPECT_THROW(
        cg::graph_from_json(nlohmann::json::parse(R"({"vertices": ["a","b"], "edges": [[0,1]], "weights": [-1]})")),
        cg::GraphError);
}

TEST(WeightedGraph, ConstructorValidates) {
    EXPECT_THROW(cg::WeightedGraph(2, {{0, 1}}, {}), cg::GraphError);
    EXPECT_THROW(cg::WeightedGraph(2, {{0, 1}, {1, 0}}, {1, 1}), cg::GraphError);
    EXPECT_THROW(cg::WeightedGraph(2, {{1, 1}}, {1}), cg::GraphError);
    EXPECT_THROW(cg::WeightedGraph(2, {{0, 2}}, {1}), cg::GraphError);
    EXPECT_THROW(cg::WeightedGraph(2, {{0, 1}}, {0.0}), cg::GraphError);
    EXPECT_THROW(cg::WeightedGraph(2, {{0, 1}}, {1}, {"only-one"}), cg::GraphError);
}

TEST(Girth, Examples) {
    EXPECT_EQ(cg::girth(gen::cycle(6)), 6u);
    EXPECT_EQ(cg::girth(gen::star(3)), std::nullopt);
    const auto c6p = gen::add_pendant(gen::cycle(6), 0);
    EXPECT_EQ(cg::girth(c6p), 6u);
    EXPECT_EQ(cg::girth(c6p), oracles::girth_by_enumeration(c6p));
    EXPECT_EQ(cg::girth(gen::cycle(3)), 3u);
}

TEST(Girth, MatchesEnumerationOnRandomGraphs) {
    cg::CounterRng rng(5);
    for (int k = 0; k < 150; ++k) {
        const std::size_t v = 3 + rng.below(7);
        const auto g = gen::random_connected(v, rng.below(6), rng);
        EXPECT_EQ(cg::girth(g), oracles::girth_by_enumeration(g)) << cg::to_edge_list(g);
    }
}

TEST(Girth, SubdivisionTriplesCycles) {
    cg::CounterRng rng(9);
    for (int k = 0; k < 60; ++k) {
        const auto g = gen::random_connected(3 + rng.below(6), rng.below(5), rng);
        const auto s = gen::subdivide(g, 3);
        EXPECT_TRUE(s.audit().girth_at_least(6));
        const auto before = cg::girth(g);
        const auto after = cg::girth(s);
        ASSERT_EQ(before.has_value(), after.has_value());
        if (before) {
            EXPECT_EQ(*after, 3 * *before);
        }
    }
}

TEST(Audit, Examples) {
    const auto c6 = cg::audit(gen::cycle(6));
    EXPECT_EQ(c6.girth, 6u);
    EXPECT_TRUE(c6.connected);
    EXPECT_TRUE(c6.admissible);

    const auto c5 = cg::audit(gen::cycle(5));
    EXPECT_EQ(c5.girth, 5u);
    EXPECT_TRUE(c5.connected);
    EXPECT_FALSE(c5.admissible);

    const auto two = cg::audit(cg::WeightedGraph::unweighted(4, {{0, 1}, {2, 3}}));
    EXPECT_EQ(two.girth, std::nullopt);
    EXPECT_FALSE(two.connected);
    EXPECT_FALSE(two.admissible);

    EXPECT_THROW(cg::require_admissible(gen::cycle(5)), cg::GraphError);
    EXPECT_THROW(cg::require_admissible(cg::WeightedGraph::unweighted(4, {{0, 1}, {2, 3}})), cg::GraphError);
    EXPECT_NO_THROW(cg::require_admissible(gen::star(3)));
}

TEST(EdgeAdjacency, Examples) {
    const auto p3 = cg::edge_adjacency(gen::path(3));
    EXPECT_EQ(p3[0], (std::vector<cg::EdgeId>{1}));
    EXPECT_EQ(p3[1], (std::vector<cg::EdgeId>{0}));

    const auto k13 = cg::edge_adjacency(gen::star(3));
    EXPECT_EQ(k13[0], (std::vector<cg::EdgeId>{1, 2}));
    EXPECT_EQ(k13[1], (std::vector<cg::EdgeId>{0, 2}));
    EXPECT_EQ(k13[2], (std::vector<cg::EdgeId>{0, 1}));

    const auto c6 = gen::cycle(6);
    const auto adj = cg::edge_adjacency(c6);
    for (cg::EdgeId i = 0; i < 6; ++i) {
        ASSERT_EQ(adj[i].size(), 2u);
        // direct enumeration: neighbours of edge i on the cycle are i +- 1 mod 6
        std::vector<cg::EdgeId> expect{(i + 5) % 6, (i + 1) % 6};
        std::sort(expect.begin(), expect.end());
        EXPECT_EQ(adj[i], expect);
    }
}

TEST(EdgeAdjacency, SymmetricIrreflexiveUniqueSharedEndpoint) {
    cg::CounterRng rng(21);
    for (int k = 0; k < 40; ++k) {
        const auto g = gen::random_admissible(60, rng);
        const auto adj = cg::edge_adjacency(g);
        for (cg::EdgeId i = 0; i < g.edge_count(); ++i) {
            for (cg::EdgeId j : adj[i]) {
                EXPECT_NE(i, j);
                EXPECT_TRUE(std::binary_search(adj[j].begin(), adj[j].end(), i));
                const auto& a = g.edge(i);
                const auto& b = g.edge(j);
                const int shared = int(b.touches(a.u)) + int(b.touches(a.v));
                EXPECT_EQ(shared, 1);
            }
            // every edge sharing an endpoint is listed
            std::size_t expected = g.degree(g.edge(i).u) + g.degree(g.edge(i).v) - 2;
            EXPECT_EQ(adj[i].size(), expected);
        }
    }
}

TEST(Generators, ProduceAdmissibleGraphs) {
    cg::CounterRng rng(1);
    for (int k = 0; k < 200; ++k) {
        const auto g = gen::random_admissible(200, rng);
        EXPECT_TRUE(g.audit().admissible);
        EXPECT_LE(g.edge_count(), 200u);
        EXPECT_GE(g.edge_count(), 1u);
    }
    EXPECT_EQ(gen::star(4).degree(0), 4u);
    EXPECT_EQ(gen::path(5).edge_count(), 4u);
    EXPECT_EQ(gen::random_tree(9, rng).edge_count(), 8u);
    const auto p = gen::add_pendant(gen::cycle(6), 2, 3.0);
    EXPECT_EQ(p.edge_count(), 7u);
    EXPECT_EQ(p.edge(6).u, 2u);
    EXPECT_DOUBLE_EQ(p.weights()[6], 3.0);
}

TEST(CounterRng, DeterministicAndBounded) {
    cg::CounterRng a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) {
        const auto x = a();
        EXPECT_EQ(x, b());
        (void)c;
    }
    cg::CounterRng d(7);
    for (int i = 0; i < 1000; ++i) {
        EXPECT_LT(d.below(13), 13u);
        const double u = d.uniform(-1, 1);
        EXPECT_GE(u, -1.0);
        EXPECT_LT(u, 1.0);
    }
    EXPECT_NE(cg::CounterRng(1)(), cg::CounterRng(2)());
}
