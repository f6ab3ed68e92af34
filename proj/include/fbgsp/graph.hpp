#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fbgsp/error.hpp"

namespace fbgsp {

using NodeId = std::uint32_t;

struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Immutable undirected simple graph in CSR form.
///
/// Rows are sorted ascending, symmetric, and free of self-loops and
/// duplicates. Renormalized operators add the identity analytically, so a
/// stored self-loop would be counted twice.
class Graph {
 public:
  std::size_t node_count() const noexcept { return degrees_.size(); }
  std::size_t edge_count() const noexcept { return neighbor_indices_.size() / 2; }

  std::span<const NodeId> neighbors(NodeId i) const {
    check_node(i);
    return {neighbor_indices_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
  }

  std::size_t degree(NodeId i) const {
    check_node(i);
    return degrees_[i];
  }

  const std::vector<std::size_t>& row_offsets() const noexcept { return row_offsets_; }
  const std::vector<NodeId>& neighbor_indices() const noexcept { return neighbor_indices_; }
  const std::vector<std::size_t>& degrees() const noexcept { return degrees_; }

  /// Undirected edge list with u < v, sorted lexicographically.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (NodeId i = 0; i < node_count(); ++i)
      for (NodeId j : neighbors(i))
        if (i < j) out.push_back({i, j});
    return out;
  }

  bool has_edge(NodeId i, NodeId j) const {
    const auto row = neighbors(i);
    return std::binary_search(row.begin(), row.end(), j);
  }

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  friend Graph build_graph(std::span<const Edge> edges, std::size_t node_count);

  void check_node(NodeId i) const {
    if (i >= node_count())
      throw Error(Errc::IndexOutOfRange,
                  "node " + std::to_string(i) + " >= " + std::to_string(node_count()));
  }

  std::vector<std::size_t> row_offsets_{0};
  std::vector<NodeId> neighbor_indices_;
  std::vector<std::size_t> degrees_;
};

/// Symmetrizes and deduplicates `edges`; (u,v) and (v,u) collapse to one edge.
inline Graph build_graph(std::span<const Edge> edges, std::size_t node_count) {
  detail::require(node_count > 0, Errc::InvalidArgument, "graph needs at least one node");
  detail::require(node_count <= std::size_t{UINT32_MAX}, Errc::InvalidArgument,
                  "node count exceeds 32-bit index range");

  std::vector<std::vector<NodeId>> adj(node_count);
  for (const Edge& e : edges) {
    if (e.u >= node_count || e.v >= node_count)
      throw Error(Errc::IndexOutOfRange, "edge (" + std::to_string(e.u) + "," +
                                             std::to_string(e.v) + ") with node_count " +
                                             std::to_string(node_count));
    if (e.u == e.v) throw Error(Errc::SelfLoopInInput, "self-loop at node " + std::to_string(e.u));
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }

  Graph g;
  g.row_offsets_.assign(1, 0);
  g.row_offsets_.reserve(node_count + 1);
  g.degrees_.reserve(node_count);
  for (auto& row : adj) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    g.neighbor_indices_.insert(g.neighbor_indices_.end(), row.begin(), row.end());
    g.row_offsets_.push_back(g.neighbor_indices_.size());
    g.degrees_.push_back(row.size());
  }
  return g;
}

inline Graph build_graph(const std::vector<std::pair<NodeId, NodeId>>& pairs, std::size_t node_count) {
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (const auto& [u, v] : pairs) edges.push_back({u, v});
  return build_graph(std::span<const Edge>(edges), node_count);
}

struct GraphDiagnostics {
  bool is_connected = false;
  bool is_bipartite = false;
  std::size_t isolated_node_count = 0;
  std::size_t component_count = 0;
};

/// Connectivity and bipartiteness by breadth-first 2-coloring.
inline GraphDiagnostics diagnose(const Graph& g) {
  GraphDiagnostics d;
  d.is_bipartite = true;
  const std::size_t n = g.node_count();
  std::vector<int> color(n, -1);
  std::queue<NodeId> frontier;
  for (NodeId s = 0; s < n; ++s) {
    if (g.degree(s) == 0) ++d.isolated_node_count;
    if (color[s] != -1) continue;
    ++d.component_count;
    color[s] = 0;
    frontier.push(s);
    while (!frontier.empty()) {
      const NodeId i = frontier.front();
      frontier.pop();
      for (NodeId j : g.neighbors(i)) {
        if (color[j] == -1) {
          color[j] = 1 - color[i];
          frontier.push(j);
        } else if (color[j] == color[i]) {
          d.is_bipartite = false;
        }
      }
    }
  }
  d.is_connected = d.component_count == 1;
  return d;
}

}  // namespace fbgsp
