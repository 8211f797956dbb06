#include "fairdyn/centrality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

#include <Eigen/Dense>

namespace fairdyn {

namespace {

constexpr std::array<std::string_view, kCentralityKindCount> kKindNames = {
    "degree",
    "avg_neighbor_degree",
    "betweenness",
    "closeness",
    "load",
    "eigenvector",
    "current_flow_betweenness",
    "current_flow_closeness",
    "information",
    "subgraph",
    "laplacian",
    "pagerank",
    "cogsnet_weight_sum",
    "avg_neighbor_cogsnet_weight_sum",
};

constexpr double kInf = std::numeric_limits<double>::infinity();

// Sources are processed in blocks; each block's per-source results land in a
// buffer that is then folded into the total in source order.
constexpr std::size_t kSourceBlock = 256;

double edge_length(double weight, bool weighted) { return weighted ? 1.0 / weight : 1.0; }

// Relative tolerance for treating two path lengths as equal.
bool same_length(double a, double b) { return std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(a)); }

struct ShortestPathDag {
  std::vector<NodeId> order;  // settled order, non-decreasing distance
  std::vector<double> dist;
  std::vector<double> sigma;
  std::vector<std::vector<NodeId>> preds;

  explicit ShortestPathDag(std::size_t n) : dist(n), sigma(n), preds(n) { order.reserve(n); }
};

void single_source(const WeightedGraph& g, NodeId s, bool weighted, ShortestPathDag& dag) {
  const std::size_t n = g.node_count();
  dag.order.clear();
  std::fill(dag.dist.begin(), dag.dist.end(), kInf);
  std::fill(dag.sigma.begin(), dag.sigma.end(), 0.0);
  for (auto& p : dag.preds) p.clear();
  dag.dist[s] = 0.0;
  dag.sigma[s] = 1.0;

  if (!weighted) {
    std::vector<NodeId> queue;
    queue.reserve(n);
    queue.push_back(s);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const NodeId v = queue[head];
      dag.order.push_back(v);
      for (const auto& nb : g.neighbors(v)) {
        const NodeId w = nb.node;
        if (dag.dist[w] == kInf) {
          dag.dist[w] = dag.dist[v] + 1.0;
          queue.push_back(w);
        }
        if (dag.dist[w] == dag.dist[v] + 1.0) {
          dag.sigma[w] += dag.sigma[v];
          dag.preds[w].push_back(v);
        }
      }
    }
    return;
  }

  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  std::vector<char> settled(n, 0);
  heap.emplace(0.0, s);
  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (settled[v] || d > dag.dist[v]) continue;
    settled[v] = 1;
    dag.order.push_back(v);
    for (const auto& nb : g.neighbors(v)) {
      const NodeId w = nb.node;
      if (settled[w]) continue;
      const double alt = dag.dist[v] + edge_length(nb.weight, true);
      if (dag.dist[w] == kInf || (alt < dag.dist[w] && !same_length(alt, dag.dist[w]))) {
        dag.dist[w] = alt;
        dag.sigma[w] = dag.sigma[v];
        dag.preds[w].assign(1, v);
        heap.emplace(alt, w);
      } else if (same_length(alt, dag.dist[w])) {
        dag.sigma[w] += dag.sigma[v];
        dag.preds[w].push_back(v);
      }
    }
  }
}

double pair_normalizer(std::size_t n) {
  // Sum over sources counts each unordered pair twice.
  return n > 2 ? 1.0 / (static_cast<double>(n - 1) * static_cast<double>(n - 2)) : 0.5;
}

// Per-source dependency vectors, written into `out` (n entries).
void betweenness_source(const WeightedGraph& g, NodeId s, bool weighted, ShortestPathDag& dag,
                        std::vector<double>& delta, double* out) {
  single_source(g, s, weighted, dag);
  std::fill(delta.begin(), delta.end(), 0.0);
  for (auto it = dag.order.rbegin(); it != dag.order.rend(); ++it) {
    const NodeId w = *it;
    const double coeff = (1.0 + delta[w]) / dag.sigma[w];
    for (NodeId v : dag.preds[w]) delta[v] += dag.sigma[v] * coeff;
    if (w != s) out[w] += delta[w];
  }
}

void load_source(const WeightedGraph& g, NodeId s, bool weighted, ShortestPathDag& dag, std::vector<double>& flow,
                 double* out) {
  single_source(g, s, weighted, dag);
  std::fill(flow.begin(), flow.end(), 0.0);
  for (NodeId v : dag.order) flow[v] = 1.0;
  for (auto it = dag.order.rbegin(); it != dag.order.rend(); ++it) {
    const NodeId w = *it;
    if (w == s) continue;
    const double share = flow[w] / static_cast<double>(dag.preds[w].size());
    for (NodeId v : dag.preds[w]) flow[v] += share;
  }
  for (NodeId v : dag.order) {
    if (v != s) out[v] += flow[v] - 1.0;
  }
}

template <typename PerSource>
std::vector<double> accumulate_sources(std::size_t n, Execution ex, PerSource&& per_source) {
  std::vector<double> total(n, 0.0);
  if (ex == Execution::Serial) {
    ShortestPathDag dag(n);
    std::vector<double> scratch(n);
    for (NodeId s = 0; s < n; ++s) per_source(s, dag, scratch, total.data());
    return total;
  }
  std::vector<double> buffer;
  for (std::size_t begin = 0; begin < n; begin += kSourceBlock) {
    const std::size_t count = std::min(kSourceBlock, n - begin);
    buffer.assign(count * n, 0.0);
#pragma omp parallel
    {
      ShortestPathDag dag(n);
      std::vector<double> scratch(n);
#pragma omp for schedule(dynamic, 4)
      for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
        per_source(static_cast<NodeId>(begin + static_cast<std::size_t>(i)), dag, scratch,
                   buffer.data() + static_cast<std::size_t>(i) * n);
      }
    }
    // Fold in source order; each entry sees the same additions as the
    // serial path (0 + x == x exactly for untouched entries).
    for (std::size_t i = 0; i < count; ++i) {
      const double* row = buffer.data() + i * n;
      const NodeId s = static_cast<NodeId>(begin + i);
      for (std::size_t v = 0; v < n; ++v) {
        if (v != s) total[v] += row[v];
      }
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Spectral helpers (per connected component)

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Component {
  std::vector<NodeId> nodes;
  std::vector<std::size_t> local;  // global -> local (only valid for members)
};

MatrixXd component_laplacian(const WeightedGraph& g, const std::vector<NodeId>& nodes,
                             const std::vector<std::size_t>& local, bool weighted) {
  const auto m = static_cast<Eigen::Index>(nodes.size());
  MatrixXd L = MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (const auto& nb : g.neighbors(nodes[static_cast<std::size_t>(i)])) {
      const double w = weighted ? nb.weight : 1.0;
      const auto j = static_cast<Eigen::Index>(local[nb.node]);
      L(i, j) -= w;
      L(i, i) += w;
    }
  }
  return L;
}

MatrixXd component_adjacency(const WeightedGraph& g, const std::vector<NodeId>& nodes,
                             const std::vector<std::size_t>& local, bool weighted) {
  const auto m = static_cast<Eigen::Index>(nodes.size());
  MatrixXd A = MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (const auto& nb : g.neighbors(nodes[static_cast<std::size_t>(i)])) {
      A(i, static_cast<Eigen::Index>(local[nb.node])) = weighted ? nb.weight : 1.0;
    }
  }
  return A;
}

MatrixXd laplacian_pinv(const MatrixXd& L) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(L);
  if (es.info() != Eigen::Success) throw ConvergenceError("Laplacian eigendecomposition failed");
  const auto& vals = es.eigenvalues();
  const auto& vecs = es.eigenvectors();
  // Connected component: exactly one zero eigenvalue, the smallest.
  MatrixXd P = MatrixXd::Zero(L.rows(), L.cols());
  for (Eigen::Index k = 1; k < vals.size(); ++k) P.noalias() += vecs.col(k) * vecs.col(k).transpose() / vals(k);
  return P;
}

template <typename Fn>
void for_each_component(const WeightedGraph& g, Fn&& fn) {
  std::vector<std::size_t> local(g.node_count(), 0);
  for (const auto& nodes : g.components()) {
    for (std::size_t i = 0; i < nodes.size(); ++i) local[nodes[i]] = i;
    fn(nodes, local);
  }
}

// ---------------------------------------------------------------------------

std::vector<double> degree(const WeightedGraph& g, bool weighted) {
  std::vector<double> out(g.node_count());
  for (NodeId u = 0; u < g.node_count(); ++u) {
    out[u] = weighted ? g.weight_sum(u) : static_cast<double>(g.degree(u));
  }
  return out;
}

std::vector<double> neighbor_mean(const WeightedGraph& g, const std::vector<double>& values) {
  std::vector<double> out(g.node_count(), 0.0);
  for (NodeId u = 0; u < g.node_count(); ++u) {
    const auto nbs = g.neighbors(u);
    if (nbs.empty()) continue;
    double s = 0.0;
    for (const auto& nb : nbs) s += values[nb.node];
    out[u] = s / static_cast<double>(nbs.size());
  }
  return out;
}

std::vector<double> eigenvector(const WeightedGraph& g, const CentralityOptions& opt) {
  std::vector<double> out(g.node_count(), 0.0);
  for_each_component(g, [&](const std::vector<NodeId>& nodes, const std::vector<std::size_t>& local) {
    const std::size_t m = nodes.size();
    if (m < 2) return;
    // Power iteration on A + I: the shift makes the Perron root strictly
    // dominant in magnitude, including on bipartite components.
    std::vector<double> x(m, 1.0 / std::sqrt(static_cast<double>(m))), y(m);
    double prev_change = kInf;
    bool converged = false;
    for (int it = 0; it < opt.max_iterations; ++it) {
      for (std::size_t i = 0; i < m; ++i) {
        double s = x[i];
        for (const auto& nb : g.neighbors(nodes[i])) s += (opt.weighted ? nb.weight : 1.0) * x[local[nb.node]];
        y[i] = s;
      }
      double norm = 0.0;
      for (double v : y) norm += v * v;
      norm = std::sqrt(norm);
      double change = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        y[i] /= norm;
        change += (y[i] - x[i]) * (y[i] - x[i]);
      }
      change = std::sqrt(change);
      std::swap(x, y);
      const double ratio = change / prev_change;
      prev_change = change;
      if (change == 0.0 || (ratio < 1.0 && change * ratio / (1.0 - ratio) < opt.tolerance && change < opt.tolerance)) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw ConvergenceError("eigenvector centrality did not converge within " + std::to_string(opt.max_iterations) +
                             " iterations");
    }
    for (std::size_t i = 0; i < m; ++i) out[nodes[i]] = std::abs(x[i]);
  });
  return out;
}

std::vector<double> pagerank(const WeightedGraph& g, const CentralityOptions& opt) {
  const std::size_t n = g.node_count();
  if (n == 0) return {};
  const double d = opt.pagerank_damping;
  std::vector<double> strength(n), x(n, 1.0 / static_cast<double>(n)), next(n);
  for (NodeId u = 0; u < n; ++u) strength[u] = opt.weighted ? g.weight_sum(u) : static_cast<double>(g.degree(u));
  bool converged = false;
  for (int it = 0; it < opt.max_iterations; ++it) {
    double dangling = 0.0;
    for (NodeId u = 0; u < n; ++u) {
      if (strength[u] == 0.0) dangling += x[u];
    }
    const double base = (1.0 - d) / static_cast<double>(n) + d * dangling / static_cast<double>(n);
    double change = 0.0;
    for (NodeId v = 0; v < n; ++v) {
      double s = 0.0;
      for (const auto& nb : g.neighbors(v)) s += x[nb.node] * (opt.weighted ? nb.weight : 1.0) / strength[nb.node];
      next[v] = base + d * s;
      change += std::abs(next[v] - x[v]);
    }
    std::swap(x, next);
    // The iteration contracts by d in L1, bounding the remaining error.
    if (change * d / (1.0 - d) < opt.tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) throw ConvergenceError("PageRank did not converge");
  const double total = std::accumulate(x.begin(), x.end(), 0.0);
  for (double& v : x) v /= total;
  return x;
}

std::vector<double> current_flow_closeness(const WeightedGraph& g, bool weighted) {
  const std::size_t n = g.node_count();
  std::vector<double> out(n, 0.0);
  for_each_component(g, [&](const std::vector<NodeId>& nodes, const std::vector<std::size_t>& local) {
    const std::size_t m = nodes.size();
    if (m < 2) return;
    const MatrixXd P = laplacian_pinv(component_laplacian(g, nodes, local, weighted));
    for (std::size_t i = 0; i < m; ++i) {
      double resistance = 0.0;
      const auto ii = static_cast<Eigen::Index>(i);
      for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(m); ++j) resistance += P(ii, ii) + P(j, j) - 2.0 * P(ii, j);
      const double reach = static_cast<double>(m - 1);
      out[nodes[i]] = reach / resistance * reach / static_cast<double>(n - 1);
    }
  });
  return out;
}

std::vector<double> information(const WeightedGraph& g, bool weighted) {
  std::vector<double> out(g.node_count(), 0.0);
  for_each_component(g, [&](const std::vector<NodeId>& nodes, const std::vector<std::size_t>& local) {
    const std::size_t m = nodes.size();
    if (m < 2) return;
    // C = (L + J)^-1; sum_j R_ij = m C_ii + tr(C) - 2 rowsum_i(C).
    MatrixXd B = component_laplacian(g, nodes, local, weighted);
    B.array() += 1.0;
    const MatrixXd C = B.ldlt().solve(MatrixXd::Identity(B.rows(), B.cols()));
    const double trace = C.trace();
    const double md = static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      out[nodes[i]] = md / (md * C(ii, ii) + trace - 2.0 * C.row(ii).sum());
    }
  });
  return out;
}

std::vector<double> subgraph(const WeightedGraph& g, bool weighted) {
  std::vector<double> out(g.node_count(), 1.0);
  for_each_component(g, [&](const std::vector<NodeId>& nodes, const std::vector<std::size_t>& local) {
    if (nodes.size() < 2) return;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(component_adjacency(g, nodes, local, weighted));
    if (es.info() != Eigen::Success) throw ConvergenceError("adjacency eigendecomposition failed");
    const VectorXd expvals = es.eigenvalues().array().exp();
    const MatrixXd& V = es.eigenvectors();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      out[nodes[i]] = V.row(ii).array().square().matrix().dot(expvals);
    }
  });
  return out;
}

std::vector<double> laplacian_drop(const WeightedGraph& g, bool weighted) {
  // Laplacian energy sum(lambda^2) = sum_i d_i^2 + sum_{i != j} w_ij^2.
  const std::size_t n = g.node_count();
  const std::vector<double> d = degree(g, weighted);
  std::vector<double> out(n, 0.0);
  for (NodeId v = 0; v < n; ++v) {
    double drop = d[v] * d[v];
    for (const auto& nb : g.neighbors(v)) {
      const double w = weighted ? nb.weight : 1.0;
      const double du = d[nb.node];
      drop += du * du - (du - w) * (du - w) + 2.0 * w * w;
    }
    out[v] = drop;
  }
  return out;
}

}  // namespace

std::string_view to_string(CentralityKind kind) noexcept { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<CentralityKind> parse_centrality_kind(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<CentralityKind>(i);
  }
  return std::nullopt;
}

namespace kernels {

std::vector<double> betweenness(const WeightedGraph& g, bool weighted, Execution ex) {
  const std::size_t n = g.node_count();
  auto total = accumulate_sources(n, ex, [&](NodeId s, ShortestPathDag& dag, std::vector<double>& scratch, double* out) {
    betweenness_source(g, s, weighted, dag, scratch, out);
  });
  const double scale = pair_normalizer(n);
  for (double& v : total) v *= scale;
  return total;
}

std::vector<double> load(const WeightedGraph& g, bool weighted, Execution ex) {
  const std::size_t n = g.node_count();
  auto total = accumulate_sources(n, ex, [&](NodeId s, ShortestPathDag& dag, std::vector<double>& scratch, double* out) {
    load_source(g, s, weighted, dag, scratch, out);
  });
  const double scale = pair_normalizer(n);
  for (double& v : total) v *= scale;
  return total;
}

std::vector<double> closeness(const WeightedGraph& g, bool weighted, Execution ex) {
  const std::size_t n = g.node_count();
  std::vector<double> out(n, 0.0);
  auto one = [&](NodeId u, ShortestPathDag& dag) {
    single_source(g, u, weighted, dag);
    double total = 0.0;
    for (NodeId v : dag.order) total += dag.dist[v];
    const double reach = static_cast<double>(dag.order.size() - 1);
    out[u] = (reach > 0.0 && total > 0.0) ? reach / total * reach / static_cast<double>(n - 1) : 0.0;
  };
  if (ex == Execution::Serial) {
    ShortestPathDag dag(n);
    for (NodeId u = 0; u < n; ++u) one(u, dag);
    return out;
  }
#pragma omp parallel
  {
    ShortestPathDag dag(n);
#pragma omp for schedule(dynamic, 4)
    for (std::ptrdiff_t u = 0; u < static_cast<std::ptrdiff_t>(n); ++u) one(static_cast<NodeId>(u), dag);
  }
  return out;
}

std::vector<double> current_flow_betweenness(const WeightedGraph& g, Execution ex) {
  // Weighted-ness is carried by the graph itself here; callers pass
  // g.unweighted() for the unweighted mode.
  const std::size_t n = g.node_count();
  std::vector<double> out(n, 0.0);
  for_each_component(g, [&](const std::vector<NodeId>& nodes, const std::vector<std::size_t>& local) {
    const std::size_t m = nodes.size();
    if (m < 3) return;
    const MatrixXd P = laplacian_pinv(component_laplacian(g, nodes, local, true));
    std::vector<WeightedEdge> edges;
    for (NodeId u : nodes) {
      for (const auto& nb : g.neighbors(u)) {
        if (u < nb.node) edges.push_back({u, nb.node, nb.weight});
      }
    }
    // For edge e = (a, b) and unit s-t current, I_e = F(s) - F(t) with
    // F(s) = c_e (P[a][s] - P[b][s]). Each edge's sum over unordered pairs of
    // |I_e| comes from one sorted pass.
    std::vector<double> pair_sums(edges.size());
    auto edge_sum = [&](std::size_t k, std::vector<double>& row) {
      const auto a = static_cast<Eigen::Index>(local[edges[k].u]);
      const auto b = static_cast<Eigen::Index>(local[edges[k].v]);
      for (std::size_t s = 0; s < m; ++s) {
        const auto ss = static_cast<Eigen::Index>(s);
        row[s] = edges[k].weight * (P(a, ss) - P(b, ss));
      }
      std::sort(row.begin(), row.end());
      double sum = 0.0;
      for (std::size_t i = 0; i < m; ++i) sum += row[i] * (2.0 * static_cast<double>(i) - static_cast<double>(m) + 1.0);
      pair_sums[k] = sum;
    };
    if (ex == Execution::Serial) {
      std::vector<double> row(m);
      for (std::size_t k = 0; k < edges.size(); ++k) edge_sum(k, row);
    } else {
#pragma omp parallel
      {
        std::vector<double> row(m);
#pragma omp for schedule(static)
        for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(edges.size()); ++k) {
          edge_sum(static_cast<std::size_t>(k), row);
        }
      }
    }
    std::vector<double> incident(m, 0.0);
    for (std::size_t k = 0; k < edges.size(); ++k) {
      incident[local[edges[k].u]] += pair_sums[k];
      incident[local[edges[k].v]] += pair_sums[k];
    }
    // Pairs where v is an endpoint carry unit current through v.
    for (std::size_t i = 0; i < m; ++i) {
      out[nodes[i]] = std::max(0.0, 0.5 * (incident[i] - static_cast<double>(m - 1)));
    }
  });
  const double scale = n > 2 ? 2.0 / (static_cast<double>(n - 1) * static_cast<double>(n - 2)) : 1.0;
  for (double& v : out) v *= scale;
  return out;
}

}  // namespace kernels

std::vector<double> compute_centrality(const WeightedGraph& g, CentralityKind kind, const CentralityOptions& options) {
  const bool w = options.weighted;
  switch (kind) {
    case CentralityKind::Degree: return degree(g, w);
    case CentralityKind::AvgNeighborDegree: return neighbor_mean(g, degree(g, w));
    case CentralityKind::Betweenness: return kernels::betweenness(g, w, options.execution);
    case CentralityKind::Closeness: return kernels::closeness(g, w, options.execution);
    case CentralityKind::Load: return kernels::load(g, w, options.execution);
    case CentralityKind::Eigenvector: return eigenvector(g, options);
    case CentralityKind::CurrentFlowBetweenness:
      return kernels::current_flow_betweenness(w ? g : g.unweighted(), options.execution);
    case CentralityKind::CurrentFlowCloseness: return current_flow_closeness(g, w);
    case CentralityKind::Information: return information(g, w);
    case CentralityKind::Subgraph: return subgraph(g, w);
    case CentralityKind::Laplacian: return laplacian_drop(g, w);
    case CentralityKind::PageRank: return pagerank(g, options);
    case CentralityKind::CogsnetWeightSum: return degree(g, true);
    case CentralityKind::AvgNeighborCogsnetWeightSum: return neighbor_mean(g, degree(g, true));
  }
  throw ValidationError("unsupported centrality kind " + std::to_string(static_cast<int>(kind)));
}

std::array<std::vector<double>, kCentralityKindCount> compute_all_centralities(const WeightedGraph& g,
                                                                               const CentralityOptions& options) {
  std::array<std::vector<double>, kCentralityKindCount> out;
  for (std::size_t k = 0; k < kCentralityKindCount; ++k) out[k] = compute_centrality(g, kAllCentralityKinds[k], options);
  return out;
}

}  // namespace fairdyn
