#include <doctest.h>

#include <cmath>

#include "../oracles/centrality_oracle.hpp"
#include "fairdyn/centrality.hpp"
#include "fairdyn/rng.hpp"

using namespace fairdyn;
using doctest::Approx;

namespace {

WeightedGraph unit_graph(std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& pairs) {
  std::vector<WeightedEdge> edges;
  for (const auto& [u, v] : pairs) edges.push_back({u, v, 1.0});
  return WeightedGraph::from_edges(n, edges);
}

WeightedGraph random_graph(std::size_t n, double density, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<WeightedEdge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (bernoulli(rng, density)) edges.push_back({u, v, 0.1 + 0.9 * uniform01(rng)});
    }
  }
  return WeightedGraph::from_edges(n, edges);
}

std::vector<double> of(const WeightedGraph& g, CentralityKind k, bool weighted = true) {
  CentralityOptions o;
  o.weighted = weighted;
  return compute_centrality(g, k, o);
}

}  // namespace

TEST_CASE("kind names") {
  CHECK(kAllCentralityKinds.size() == 14);
  for (CentralityKind k : kAllCentralityKinds) CHECK(parse_centrality_kind(to_string(k)) == k);
  CHECK(to_string(CentralityKind::CurrentFlowBetweenness) == "current_flow_betweenness");
  CHECK_FALSE(parse_centrality_kind("katz").has_value());
}

TEST_CASE("graph construction") {
  const std::vector<WeightedEdge> dup{{0, 1, 1.0}, {1, 0, 2.0}};
  CHECK_THROWS_AS(WeightedGraph::from_edges(2, dup), ValidationError);
  const std::vector<WeightedEdge> loop{{1, 1, 1.0}};
  CHECK_THROWS_AS(WeightedGraph::from_edges(2, loop), ValidationError);
  const auto g = unit_graph(5, {{0, 1}, {1, 2}, {3, 4}});
  CHECK(g.components().size() == 2);
}

TEST_CASE("star betweenness") {
  const auto g = unit_graph(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  const auto b = of(g, CentralityKind::Betweenness);
  CHECK(b[0] == Approx(1.0));
  for (NodeId v = 1; v < 5; ++v) CHECK(b[v] == 0.0);
  const auto load = of(g, CentralityKind::Load);
  CHECK(load[0] == Approx(1.0));
}

TEST_CASE("path closeness") {
  const auto g = unit_graph(3, {{0, 1}, {1, 2}});
  const auto c = of(g, CentralityKind::Closeness, false);
  CHECK(c[1] == Approx(1.0));
  CHECK(c[0] == Approx(2.0 / 3.0));
}

TEST_CASE("cycle PageRank is uniform") {
  const auto g = unit_graph(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}});
  for (double p : of(g, CentralityKind::PageRank)) CHECK(p == Approx(1.0 / 6.0).epsilon(1e-9));
}

TEST_CASE("complete graph eigenvector") {
  const auto g = unit_graph(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
  for (double x : of(g, CentralityKind::Eigenvector)) CHECK(x == Approx(0.5).epsilon(1e-9));
}

TEST_CASE("edgeless snapshot values") {
  const WeightedGraph g(4);
  const auto all = compute_all_centralities(g);
  for (NodeId v = 0; v < 4; ++v) {
    CHECK(all[static_cast<std::size_t>(CentralityKind::Degree)][v] == 0.0);
    CHECK(all[static_cast<std::size_t>(CentralityKind::PageRank)][v] == Approx(0.25));
    CHECK(all[static_cast<std::size_t>(CentralityKind::Subgraph)][v] == 1.0);
    CHECK(all[static_cast<std::size_t>(CentralityKind::Closeness)][v] == 0.0);
    CHECK(all[static_cast<std::size_t>(CentralityKind::Information)][v] == 0.0);
  }
}

TEST_CASE("single weighted edge") {
  const std::vector<WeightedEdge> e{{0, 1, 0.5}};
  const auto g = WeightedGraph::from_edges(2, e);
  const auto w = of(g, CentralityKind::CogsnetWeightSum);
  CHECK(w[0] == 0.5);
  CHECK(w[1] == 0.5);
  CHECK(of(g, CentralityKind::Degree, false)[0] == 1.0);
  // Weighted strength feeds the neighbor average in weighted mode only.
  CHECK(of(g, CentralityKind::AvgNeighborDegree, true)[0] == 0.5);
  CHECK(of(g, CentralityKind::AvgNeighborDegree, false)[0] == 1.0);
}

TEST_CASE("library matches the brute-force oracles on random graphs") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto g = random_graph(8, 0.45, seed);
    for (bool weighted : {true, false}) {
      CentralityOptions o;
      o.weighted = weighted;
      const auto got = compute_all_centralities(g, o);
      const auto want = oracle::all(oracle::to_dense(g), weighted);
      for (std::size_t k = 0; k < kCentralityKindCount; ++k) {
        CAPTURE(to_string(kAllCentralityKinds[k]));
        for (NodeId v = 0; v < 8; ++v) {
          CHECK(std::abs(got[k][v] - want[k][v]) <= 1e-6 * std::max(1.0, std::abs(want[k][v])));
        }
      }
    }
  }
}

TEST_CASE("serial and parallel kernels agree bit for bit") {
  const auto g = random_graph(120, 0.08, 77);
  for (bool weighted : {true, false}) {
    CHECK(kernels::betweenness(g, weighted, Execution::Serial) ==
          kernels::betweenness(g, weighted, Execution::Parallel));
    CHECK(kernels::load(g, weighted, Execution::Serial) == kernels::load(g, weighted, Execution::Parallel));
    CHECK(kernels::closeness(g, weighted, Execution::Serial) == kernels::closeness(g, weighted, Execution::Parallel));
  }
  CHECK(kernels::current_flow_betweenness(g, Execution::Serial) ==
        kernels::current_flow_betweenness(g, Execution::Parallel));
}

TEST_CASE("oracle self-checks") {
  // Jacobi on a known symmetric matrix: eigenvalues of [[2,1],[1,2]] are 1 and 3.
  auto s = oracle::jacobi_eigen({{2, 1}, {1, 2}});
  std::sort(s.values.begin(), s.values.end());
  CHECK(s.values[0] == Approx(1.0));
  CHECK(s.values[1] == Approx(3.0));
  const auto x = oracle::solve({{2, 1}, {1, 3}}, {3, 5});
  CHECK(x[0] == Approx(0.8));
  CHECK(x[1] == Approx(1.4));
}
