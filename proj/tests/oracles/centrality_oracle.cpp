#include "centrality_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace fairdyn::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); }

double conductance(const DenseGraph& g, std::size_t u, std::size_t v, bool weighted) {
  if (g.w[u][v] == 0.0) return 0.0;
  return weighted ? g.w[u][v] : 1.0;
}

Dense all_pairs_lengths(const DenseGraph& g, bool weighted) {
  Dense d(g.n, std::vector<double>(g.n, kInf));
  for (std::size_t u = 0; u < g.n; ++u) {
    d[u][u] = 0.0;
    for (std::size_t v = 0; v < g.n; ++v) {
      if (g.w[u][v] != 0.0) d[u][v] = weighted ? 1.0 / g.w[u][v] : 1.0;
    }
  }
  for (std::size_t k = 0; k < g.n; ++k) {
    for (std::size_t i = 0; i < g.n; ++i) {
      for (std::size_t j = 0; j < g.n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    }
  }
  return d;
}

double length(const DenseGraph& g, std::size_t u, std::size_t v, bool weighted) {
  return weighted ? 1.0 / g.w[u][v] : 1.0;
}

std::vector<std::vector<std::size_t>> components(const DenseGraph& g) {
  std::vector<int> label(g.n, -1);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t s = 0; s < g.n; ++s) {
    if (label[s] >= 0) continue;
    std::vector<std::size_t> comp{s};
    label[s] = static_cast<int>(out.size());
    for (std::size_t i = 0; i < comp.size(); ++i) {
      for (std::size_t v = 0; v < g.n; ++v) {
        if (g.w[comp[i]][v] != 0.0 && label[v] < 0) {
          label[v] = label[s];
          comp.push_back(v);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(comp);
  }
  return out;
}

Dense laplacian_of(const DenseGraph& g, const std::vector<std::size_t>& nodes, bool weighted) {
  const std::size_t m = nodes.size();
  Dense L(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      const double c = conductance(g, nodes[i], nodes[j], weighted);
      L[i][j] = -c;
      L[i][i] += c;
    }
  }
  return L;
}

/// Effective resistances inside one connected component via
/// pinv(L) = inv(L + J/m) - J/m.
Dense resistances(const DenseGraph& g, const std::vector<std::size_t>& nodes, bool weighted) {
  const std::size_t m = nodes.size();
  Dense L = laplacian_of(g, nodes, weighted);
  const double j = 1.0 / static_cast<double>(m);
  for (auto& row : L) {
    for (double& x : row) x += j;
  }
  Dense P = inverse(L);
  for (auto& row : P) {
    for (double& x : row) x -= j;
  }
  Dense R(m, std::vector<double>(m, 0.0));
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) R[a][b] = P[a][a] + P[b][b] - 2.0 * P[a][b];
  }
  return R;
}

double laplacian_energy(const DenseGraph& g, bool weighted) {
  std::vector<std::size_t> all(g.n);
  std::iota(all.begin(), all.end(), 0);
  const Spectrum s = jacobi_eigen(laplacian_of(g, all, weighted));
  double e = 0.0;
  for (double v : s.values) e += v * v;
  return e;
}

double pair_scale(std::size_t n) {
  return n > 2 ? 2.0 / (static_cast<double>(n - 1) * static_cast<double>(n - 2)) : 0.0;
}

}  // namespace

DenseGraph to_dense(const WeightedGraph& g) {
  DenseGraph d{g.node_count(), Dense(g.node_count(), std::vector<double>(g.node_count(), 0.0))};
  for (const auto& e : g.edges()) {
    d.w[e.u][e.v] = e.weight;
    d.w[e.v][e.u] = e.weight;
  }
  return d;
}

Spectrum jacobi_eigen(Dense a) {
  const std::size_t n = a.size();
  Dense v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        total += a[i][j] * a[i][j];
        if (i != j) off += a[i][j] * a[i][j];
      }
    }
    if (off <= 1e-30 * std::max(total, 1e-300)) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  Spectrum out;
  for (std::size_t k = 0; k < n; ++k) {
    out.values.push_back(a[k][k]);
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = v[i][k];
    out.vectors.push_back(col);
  }
  return out;
}

std::vector<double> solve(Dense a, std::vector<double> b) {
  const std::size_t n = a.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[pivot][c])) pivot = r;
    }
    if (a[pivot][c] == 0.0) throw std::runtime_error("singular system in oracle");
    std::swap(a[c], a[pivot]);
    std::swap(b[c], b[pivot]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

Dense inverse(const Dense& a) {
  const std::size_t n = a.size();
  Dense out(n, std::vector<double>(n));
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<double> e(n, 0.0);
    e[c] = 1.0;
    const auto col = solve(a, e);
    for (std::size_t r = 0; r < n; ++r) out[r][c] = col[r];
  }
  return out;
}

std::vector<double> degree(const DenseGraph& g, bool weighted) {
  std::vector<double> out(g.n, 0.0);
  for (std::size_t u = 0; u < g.n; ++u) {
    for (std::size_t v = 0; v < g.n; ++v) out[u] += conductance(g, u, v, weighted);
  }
  return out;
}

std::vector<double> avg_neighbor(const DenseGraph& g, const std::vector<double>& values) {
  std::vector<double> out(g.n, 0.0);
  for (std::size_t u = 0; u < g.n; ++u) {
    double sum = 0.0;
    int count = 0;
    for (std::size_t v = 0; v < g.n; ++v) {
      if (g.w[u][v] == 0.0) continue;
      sum += values[v];
      ++count;
    }
    if (count > 0) out[u] = sum / count;
  }
  return out;
}

std::vector<double> betweenness(const DenseGraph& g, bool weighted) {
  const Dense d = all_pairs_lengths(g, weighted);
  std::vector<double> out(g.n, 0.0);
  for (std::size_t s = 0; s < g.n; ++s) {
    for (std::size_t t = s + 1; t < g.n; ++t) {
      if (d[s][t] == kInf) continue;
      // Enumerate every shortest s-t path and count interior visits.
      double paths = 0.0;
      std::vector<double> through(g.n, 0.0);
      std::vector<std::size_t> path{s};
      std::function<void(std::size_t)> walk = [&](std::size_t u) {
        if (u == t) {
          paths += 1.0;
          for (std::size_t i = 1; i + 1 < path.size(); ++i) through[path[i]] += 1.0;
          return;
        }
        for (std::size_t x = 0; x < g.n; ++x) {
          if (g.w[u][x] == 0.0) continue;
          const double via = d[s][u] + length(g, u, x, weighted);
          if (!close(via, d[s][x]) || !close(d[s][x] + d[x][t], d[s][t])) continue;
          path.push_back(x);
          walk(x);
          path.pop_back();
        }
      };
      walk(s);
      for (std::size_t v = 0; v < g.n; ++v) out[v] += through[v] / paths;
    }
  }
  const double scale = pair_scale(g.n);
  for (double& v : out) v *= scale;
  return out;
}

std::vector<double> closeness(const DenseGraph& g, bool weighted) {
  const Dense d = all_pairs_lengths(g, weighted);
  std::vector<double> out(g.n, 0.0);
  for (std::size_t u = 0; u < g.n; ++u) {
    double reach = 0.0, total = 0.0;
    for (std::size_t v = 0; v < g.n; ++v) {
      if (v == u || d[u][v] == kInf) continue;
      reach += 1.0;
      total += d[u][v];
    }
    if (reach > 0.0) out[u] = reach / total * reach / static_cast<double>(g.n - 1);
  }
  return out;
}

std::vector<double> load(const DenseGraph& g, bool weighted) {
  const Dense d = all_pairs_lengths(g, weighted);
  std::vector<double> out(g.n, 0.0);
  for (std::size_t s = 0; s < g.n; ++s) {
    std::vector<std::size_t> by_distance(g.n);
    std::iota(by_distance.begin(), by_distance.end(), 0);
    std::sort(by_distance.begin(), by_distance.end(),
              [&](std::size_t a, std::size_t b) { return d[s][a] > d[s][b]; });
    for (std::size_t t = 0; t < g.n; ++t) {
      if (t == s || d[s][t] == kInf) continue;
      // One unit travels from t back towards s, splitting evenly over the
      // shortest-path predecessors at every node.
      std::vector<double> amount(g.n, 0.0);
      amount[t] = 1.0;
      for (std::size_t x : by_distance) {
        if (x == s || amount[x] == 0.0) continue;
        std::vector<std::size_t> preds;
        for (std::size_t u = 0; u < g.n; ++u) {
          if (g.w[u][x] != 0.0 && d[s][u] != kInf && close(d[s][u] + length(g, u, x, weighted), d[s][x])) {
            preds.push_back(u);
          }
        }
        for (std::size_t u : preds) amount[u] += amount[x] / static_cast<double>(preds.size());
      }
      for (std::size_t v = 0; v < g.n; ++v) {
        if (v != s && v != t) out[v] += amount[v];
      }
    }
  }
  const double scale = pair_scale(g.n) / 2.0;
  for (double& v : out) v *= scale;
  return out;
}

std::vector<double> eigenvector(const DenseGraph& g, bool weighted) {
  std::vector<double> out(g.n, 0.0);
  for (const auto& nodes : components(g)) {
    const std::size_t m = nodes.size();
    if (m < 2) continue;
    Dense a(m, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) a[i][j] = conductance(g, nodes[i], nodes[j], weighted);
    }
    const Spectrum s = jacobi_eigen(a);
    const std::size_t top =
        static_cast<std::size_t>(std::max_element(s.values.begin(), s.values.end()) - s.values.begin());
    for (std::size_t i = 0; i < m; ++i) out[nodes[i]] = std::abs(s.vectors[top][i]);
  }
  return out;
}

std::vector<double> current_flow_betweenness(const DenseGraph& g, bool weighted) {
  std::vector<double> out(g.n, 0.0);
  for (const auto& nodes : components(g)) {
    const std::size_t m = nodes.size();
    if (m < 3) continue;
    const Dense L = laplacian_of(g, nodes, weighted);
    for (std::size_t s = 0; s < m; ++s) {
      for (std::size_t t = s + 1; t < m; ++t) {
        // Unit current in at s, out at t; ground t and solve the reduced
        // Laplacian for the remaining potentials.
        Dense reduced;
        std::vector<double> rhs;
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < m; ++i) {
          if (i == t) continue;
          keep.push_back(i);
        }
        for (std::size_t i : keep) {
          std::vector<double> row;
          for (std::size_t j : keep) row.push_back(L[i][j]);
          reduced.push_back(row);
          rhs.push_back(i == s ? 1.0 : 0.0);
        }
        const auto x = solve(reduced, rhs);
        std::vector<double> p(m, 0.0);
        for (std::size_t k = 0; k < keep.size(); ++k) p[keep[k]] = x[k];
        for (std::size_t v = 0; v < m; ++v) {
          if (v == s || v == t) continue;
          double flow = 0.0;
          for (std::size_t u = 0; u < m; ++u) {
            flow += conductance(g, nodes[v], nodes[u], weighted) * std::abs(p[v] - p[u]);
          }
          out[nodes[v]] += 0.5 * flow;
        }
      }
    }
  }
  const double scale = pair_scale(g.n);
  for (double& v : out) v *= scale;
  return out;
}

std::vector<double> current_flow_closeness(const DenseGraph& g, bool weighted) {
  std::vector<double> out(g.n, 0.0);
  for (const auto& nodes : components(g)) {
    const std::size_t m = nodes.size();
    if (m < 2) continue;
    const Dense R = resistances(g, nodes, weighted);
    for (std::size_t i = 0; i < m; ++i) {
      const double total = std::accumulate(R[i].begin(), R[i].end(), 0.0);
      const double reach = static_cast<double>(m - 1);
      out[nodes[i]] = reach / total * reach / static_cast<double>(g.n - 1);
    }
  }
  return out;
}

std::vector<double> information(const DenseGraph& g, bool weighted) {
  std::vector<double> out(g.n, 0.0);
  for (const auto& nodes : components(g)) {
    const std::size_t m = nodes.size();
    if (m < 2) continue;
    const Dense R = resistances(g, nodes, weighted);
    for (std::size_t i = 0; i < m; ++i) {
      out[nodes[i]] = static_cast<double>(m) / std::accumulate(R[i].begin(), R[i].end(), 0.0);
    }
  }
  return out;
}

std::vector<double> subgraph(const DenseGraph& g, bool weighted) {
  // exp(A) by scaling and squaring a Taylor series.
  const std::size_t n = g.n;
  Dense a(n, std::vector<double>(n, 0.0));
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      a[i][j] = conductance(g, i, j, weighted);
      row += a[i][j];
    }
    norm = std::max(norm, row);
  }
  int squarings = 0;
  while (norm > 0.25) {
    norm /= 2.0;
    ++squarings;
  }
  const double scale = std::ldexp(1.0, -squarings);
  for (auto& row : a) {
    for (double& x : row) x *= scale;
  }
  auto multiply = [n](const Dense& x, const Dense& y) {
    Dense z(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < n; ++j) z[i][j] += x[i][k] * y[k][j];
      }
    }
    return z;
  };
  Dense result(n, std::vector<double>(n, 0.0)), term(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) result[i][i] = term[i][i] = 1.0;
  for (int k = 1; k <= 30; ++k) {
    term = multiply(term, a);
    for (auto& row : term) {
      for (double& x : row) x /= k;
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) result[i][j] += term[i][j];
    }
  }
  for (int s = 0; s < squarings; ++s) result = multiply(result, result);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = result[i][i];
  return out;
}

std::vector<double> laplacian(const DenseGraph& g, bool weighted) {
  const double full = laplacian_energy(g, weighted);
  std::vector<double> out(g.n, 0.0);
  for (std::size_t v = 0; v < g.n; ++v) {
    DenseGraph h = g;
    for (std::size_t u = 0; u < g.n; ++u) h.w[u][v] = h.w[v][u] = 0.0;
    out[v] = full - laplacian_energy(h, weighted);
  }
  return out;
}

std::vector<double> pagerank(const DenseGraph& g, bool weighted, double damping) {
  const std::size_t n = g.n;
  if (n == 0) return {};
  const auto strength = degree(g, weighted);
  // Column-stochastic transitions; a node without edges jumps uniformly.
  Dense system(n, std::vector<double>(n, 0.0));
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      const double p = strength[u] == 0.0 ? 1.0 / static_cast<double>(n) : conductance(g, u, v, weighted) / strength[u];
      system[v][u] -= damping * p;
    }
    system[u][u] += 1.0;
  }
  auto x = solve(system, std::vector<double>(n, (1.0 - damping) / static_cast<double>(n)));
  const double total = std::accumulate(x.begin(), x.end(), 0.0);
  for (double& v : x) v /= total;
  return x;
}

std::array<std::vector<double>, kCentralityKindCount> all(const DenseGraph& g, bool weighted, double damping) {
  const auto deg = degree(g, weighted);
  const auto strength = degree(g, true);
  return {deg,
          avg_neighbor(g, deg),
          betweenness(g, weighted),
          closeness(g, weighted),
          load(g, weighted),
          eigenvector(g, weighted),
          current_flow_betweenness(g, weighted),
          current_flow_closeness(g, weighted),
          information(g, weighted),
          subgraph(g, weighted),
          laplacian(g, weighted),
          pagerank(g, weighted, damping),
          strength,
          avg_neighbor(g, strength)};
}

}  // namespace fairdyn::oracle
