#include <gtest/gtest.h>

#include <vector>

#include "fbgsp/graph.hpp"
#include "oracle.hpp"

using namespace fbgsp;

TEST(Graph, BuildP3) {
  const Graph g = build_graph({{0, 1}, {1, 2}}, 3);
  EXPECT_EQ(g.node_count(), 3u);
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_EQ(g.degree(0), 1u);
  EXPECT_EQ(g.degree(1), 2u);
  EXPECT_EQ(g.degree(2), 1u);
  const auto nb = g.neighbors(1);
  EXPECT_EQ(std::vector<NodeId>(nb.begin(), nb.end()), (std::vector<NodeId>{0, 2}));
}

TEST(Graph, SymmetrizesAndDeduplicates) {
  const Graph a = build_graph({{0, 1}, {1, 0}, {0, 1}, {2, 1}}, 3);
  const Graph b = build_graph({{0, 1}, {1, 2}}, 3);
  EXPECT_EQ(a, b);
  EXPECT_TRUE(a.has_edge(1, 0));
  EXPECT_FALSE(a.has_edge(0, 2));
}

TEST(Graph, EdgesAreCanonical) {
  const Graph g = build_graph({{2, 0}, {1, 0}, {2, 1}}, 3);
  const auto e = g.edges();
  ASSERT_EQ(e.size(), 3u);
  for (const Edge& x : e) EXPECT_LT(x.u, x.v);
  EXPECT_EQ(e[0].u, 0u);
  EXPECT_EQ(e[0].v, 1u);
  EXPECT_EQ(e[2].u, 1u);
  EXPECT_EQ(e[2].v, 2u);
}

TEST(Graph, Errors) {
  try {
    build_graph({{0, 3}}, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::IndexOutOfRange);
  }
  try {
    build_graph({{1, 1}}, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SelfLoopInInput);
  }
  EXPECT_THROW(build_graph(std::vector<std::pair<NodeId, NodeId>>{}, 0), Error);
  const Graph g = build_graph({{0, 1}}, 2);
  EXPECT_THROW(g.neighbors(2), Error);
}

TEST(Graph, IsolatedNodesAllowed) {
  const Graph g = build_graph({{0, 1}}, 4);
  EXPECT_EQ(g.degree(3), 0u);
  const GraphDiagnostics d = diagnose(g);
  EXPECT_EQ(d.isolated_node_count, 2u);
  EXPECT_EQ(d.component_count, 3u);
  EXPECT_FALSE(d.is_connected);
}

TEST(Graph, Diagnostics) {
  EXPECT_TRUE(diagnose(oracle::path_graph(5)).is_bipartite);
  EXPECT_TRUE(diagnose(oracle::path_graph(5)).is_connected);
  EXPECT_TRUE(diagnose(oracle::cycle_graph(6)).is_bipartite);
  EXPECT_FALSE(diagnose(oracle::cycle_graph(5)).is_bipartite);
  EXPECT_FALSE(diagnose(oracle::complete_graph(3)).is_bipartite);
}

TEST(Graph, DegreeSumIsTwiceEdgeCount) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Graph g = oracle::random_graph(30, 0.15, seed);
    std::size_t total = 0;
    for (std::size_t d : g.degrees()) total += d;
    EXPECT_EQ(total, 2 * g.edge_count());
    for (NodeId i = 0; i < g.node_count(); ++i)
      for (NodeId j : g.neighbors(i)) EXPECT_TRUE(g.has_edge(j, i));
  }
}
