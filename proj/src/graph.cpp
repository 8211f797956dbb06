#include "fairdyn/graph.hpp"

#include <algorithm>
#include <string>

namespace fairdyn {

WeightedGraph WeightedGraph::from_edges(std::size_t node_count, std::span<const WeightedEdge> edges) {
  WeightedGraph g(node_count);
  for (const auto& e : edges) {
    if (e.u >= node_count || e.v >= node_count) throw ValidationError("edge endpoint out of range");
    if (e.u == e.v) throw ValidationError("self-loop on node " + std::to_string(e.u));
    if (!(e.weight > 0.0)) throw ValidationError("edge weights must be positive");
    g.adjacency_[e.u].push_back({e.v, e.weight});
    g.adjacency_[e.v].push_back({e.u, e.weight});
  }
  for (auto& list : g.adjacency_) {
    std::sort(list.begin(), list.end(), [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
    auto dup = std::adjacent_find(list.begin(), list.end(),
                                  [](const Neighbor& a, const Neighbor& b) { return a.node == b.node; });
    if (dup != list.end()) throw ValidationError("duplicate edge to node " + std::to_string(dup->node));
  }
  g.edge_count_ = edges.size();
  return g;
}

double WeightedGraph::weight_sum(NodeId u) const {
  double s = 0.0;
  for (const auto& n : adjacency_[u]) s += n.weight;
  return s;
}

double WeightedGraph::weight(NodeId u, NodeId v) const {
  const auto& list = adjacency_[u];
  auto it = std::lower_bound(list.begin(), list.end(), v, [](const Neighbor& n, NodeId x) { return n.node < x; });
  return (it != list.end() && it->node == v) ? it->weight : 0.0;
}

std::vector<WeightedEdge> WeightedGraph::edges() const {
  std::vector<WeightedEdge> out;
  out.reserve(edge_count_);
  for (NodeId u = 0; u < adjacency_.size(); ++u) {
    for (const auto& n : adjacency_[u]) {
      if (u < n.node) out.push_back({u, n.node, n.weight});
    }
  }
  return out;
}

std::vector<std::vector<NodeId>> WeightedGraph::components() const {
  const std::size_t n = adjacency_.size();
  std::vector<int> label(n, -1);
  std::vector<std::vector<NodeId>> out;
  std::vector<NodeId> stack;
  for (NodeId s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    const int id = static_cast<int>(out.size());
    out.emplace_back();
    label[s] = id;
    stack.push_back(s);
    while (!stack.empty()) {
      const NodeId u = stack.back();
      stack.pop_back();
      out.back().push_back(u);
      for (const auto& nb : adjacency_[u]) {
        if (label[nb.node] < 0) {
          label[nb.node] = id;
          stack.push_back(nb.node);
        }
      }
    }
    std::sort(out.back().begin(), out.back().end());
  }
  return out;
}

WeightedGraph WeightedGraph::unweighted() const {
  WeightedGraph g = *this;
  for (auto& list : g.adjacency_) {
    for (auto& n : list) n.weight = 1.0;
  }
  return g;
}

}  // namespace fairdyn
