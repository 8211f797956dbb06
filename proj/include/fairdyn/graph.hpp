#pragma once

#include <span>
#include <utility>
#include <vector>

#include "fairdyn/core.hpp"

namespace fairdyn {

struct Neighbor {
  NodeId node;
  double weight;
};

struct WeightedEdge {
  NodeId u;
  NodeId v;
  double weight;
};

/// Simple undirected graph with positive edge weights. Adjacency lists are
/// kept sorted by neighbor id so iteration order is deterministic.
class WeightedGraph {
 public:
  WeightedGraph() = default;
  explicit WeightedGraph(std::size_t node_count) : adjacency_(node_count) {}

  /// Builds from an edge list; duplicate pairs and self-loops are rejected.
  static WeightedGraph from_edges(std::size_t node_count, std::span<const WeightedEdge> edges);

  std::size_t node_count() const noexcept { return adjacency_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }

  std::span<const Neighbor> neighbors(NodeId u) const { return adjacency_[u]; }
  std::size_t degree(NodeId u) const { return adjacency_[u].size(); }
  double weight_sum(NodeId u) const;
  /// 0 when the edge is absent.
  double weight(NodeId u, NodeId v) const;

  /// Edges with u < v, ordered by (u, v).
  std::vector<WeightedEdge> edges() const;

  /// Connected components, each listed in ascending node order; components
  /// are ordered by their smallest node.
  std::vector<std::vector<NodeId>> components() const;

  /// Same graph with every weight replaced by 1.
  WeightedGraph unweighted() const;

 private:
  std::vector<std::vector<Neighbor>> adjacency_;
  std::size_t edge_count_ = 0;
};

}  // namespace fairdyn
