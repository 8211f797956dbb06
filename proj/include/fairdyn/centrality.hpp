#pragma once

#include <array>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "fairdyn/graph.hpp"

namespace fairdyn {

/// Execution policy for the data-parallel kernels. `Serial` is the reference
/// path; `Parallel` splits independent work units across OpenMP threads and
/// reduces their results in unit order, so both paths return bit-identical
/// values.
enum class Execution : std::uint8_t { Serial, Parallel };

enum class CentralityKind : std::uint8_t {
  Degree,
  AvgNeighborDegree,
  Betweenness,
  Closeness,
  Load,
  Eigenvector,
  CurrentFlowBetweenness,
  CurrentFlowCloseness,
  Information,
  Subgraph,
  Laplacian,
  PageRank,
  CogsnetWeightSum,
  AvgNeighborCogsnetWeightSum,
};

inline constexpr std::size_t kCentralityKindCount = 14;

inline constexpr std::array<CentralityKind, kCentralityKindCount> kAllCentralityKinds = {
    CentralityKind::Degree,
    CentralityKind::AvgNeighborDegree,
    CentralityKind::Betweenness,
    CentralityKind::Closeness,
    CentralityKind::Load,
    CentralityKind::Eigenvector,
    CentralityKind::CurrentFlowBetweenness,
    CentralityKind::CurrentFlowCloseness,
    CentralityKind::Information,
    CentralityKind::Subgraph,
    CentralityKind::Laplacian,
    CentralityKind::PageRank,
    CentralityKind::CogsnetWeightSum,
    CentralityKind::AvgNeighborCogsnetWeightSum,
};

/// snake_case column name, e.g. "current_flow_betweenness".
std::string_view to_string(CentralityKind kind) noexcept;
std::optional<CentralityKind> parse_centrality_kind(std::string_view name) noexcept;

struct CentralityOptions {
  /// Weighted mode uses snapshot weights for degree-like measures, the
  /// spectral measures and conductances; path lengths are 1/weight.
  bool weighted = true;
  Execution execution = Execution::Parallel;
  /// A-posteriori error bound for the iterative solvers.
  double tolerance = 1e-8;
  int max_iterations = 100000;
  double pagerank_damping = 0.85;
};

/// Computes one centrality for every node (result indexed by NodeId).
///
/// Conventions: path measures are normalized by (n-1)(n-2)/2 over unordered
/// pairs; closeness and current-flow closeness are component-restricted and
/// scaled by reachability (r-1)/(n-1); eigenvector, current-flow and
/// information centralities are computed per connected component;
/// isolates get 0 for every kind except Subgraph (1) and PageRank.
std::vector<double> compute_centrality(const WeightedGraph& g, CentralityKind kind,
                                       const CentralityOptions& options = {});

/// All kinds at once, in kAllCentralityKinds order.
std::array<std::vector<double>, kCentralityKindCount> compute_all_centralities(const WeightedGraph& g,
                                                                               const CentralityOptions& options = {});

namespace kernels {
// Exposed for tests and benchmarks; each takes the execution policy directly.
std::vector<double> betweenness(const WeightedGraph& g, bool weighted, Execution ex);
std::vector<double> load(const WeightedGraph& g, bool weighted, Execution ex);
std::vector<double> closeness(const WeightedGraph& g, bool weighted, Execution ex);
std::vector<double> current_flow_betweenness(const WeightedGraph& g, Execution ex);
}  // namespace kernels

}  // namespace fairdyn
