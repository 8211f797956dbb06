#include <benchmark/benchmark.h>

#include "fairdyn/centrality.hpp"
#include "fairdyn/ml.hpp"
#include "fairdyn/rng.hpp"

namespace {

using fairdyn::Execution;

fairdyn::WeightedGraph random_graph(std::size_t n, double mean_degree, std::uint64_t seed) {
  fairdyn::Rng rng(seed);
  const double p = mean_degree / static_cast<double>(n - 1);
  std::vector<fairdyn::WeightedEdge> edges;
  for (fairdyn::NodeId u = 0; u < n; ++u) {
    for (fairdyn::NodeId v = u + 1; v < n; ++v) {
      if (fairdyn::bernoulli(rng, p)) edges.push_back({u, v, 0.05 + 0.95 * fairdyn::uniform01(rng)});
    }
  }
  return fairdyn::WeightedGraph::from_edges(n, edges);
}

std::pair<fairdyn::ml::Matrix, fairdyn::ml::Labels> noisy_rows(std::size_t n, std::size_t width) {
  fairdyn::Rng rng(3);
  fairdyn::ml::Matrix X(n, width);
  fairdyn::ml::Labels y(n);
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0;
    for (std::size_t c = 0; c < width; ++c) {
      X(r, c) = fairdyn::uniform01(rng);
      if (c < 3) s += X(r, c);
    }
    y[r] = s + 0.3 * fairdyn::uniform01(rng) > 1.65 ? 1 : 0;
  }
  return {X, y};
}

Execution policy(const benchmark::State& state) { return state.range(1) == 0 ? Execution::Serial : Execution::Parallel; }

void label(benchmark::State& state) { state.SetLabel(state.range(1) == 0 ? "serial" : "openmp"); }

void BM_Betweenness(benchmark::State& state) {
  const auto g = random_graph(static_cast<std::size_t>(state.range(0)), 8.0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(fairdyn::kernels::betweenness(g, true, policy(state)));
  label(state);
}

void BM_Load(benchmark::State& state) {
  const auto g = random_graph(static_cast<std::size_t>(state.range(0)), 8.0, 2);
  for (auto _ : state) benchmark::DoNotOptimize(fairdyn::kernels::load(g, true, policy(state)));
  label(state);
}

void BM_Closeness(benchmark::State& state) {
  const auto g = random_graph(static_cast<std::size_t>(state.range(0)), 8.0, 3);
  for (auto _ : state) benchmark::DoNotOptimize(fairdyn::kernels::closeness(g, true, policy(state)));
  label(state);
}

void BM_CurrentFlowBetweenness(benchmark::State& state) {
  const auto g = random_graph(static_cast<std::size_t>(state.range(0)), 8.0, 4);
  for (auto _ : state) benchmark::DoNotOptimize(fairdyn::kernels::current_flow_betweenness(g, policy(state)));
  label(state);
}

void BM_FitForest(benchmark::State& state) {
  const auto [X, y] = noisy_rows(static_cast<std::size_t>(state.range(0)), 24);
  fairdyn::ml::ForestParams params;
  params.n_estimators = 50;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        fairdyn::ml::fit_forest(X, y, params, 9, {}, fairdyn::ml::ModelFamily::RandomForest, policy(state)));
  }
  label(state);
}

void BM_GridSearch(benchmark::State& state) {
  const auto [X, y] = noisy_rows(static_cast<std::size_t>(state.range(0)), 24);
  const auto grid = fairdyn::ml::grid_from_json(fairdyn::ml::ModelFamily::DecisionTree,
                                                {{"criterion", {"gini", "entropy"}}, {"max_depth", {1, 25}}});
  fairdyn::ml::CVConfig cv;
  cv.seed = 5;
  for (auto _ : state) benchmark::DoNotOptimize(fairdyn::ml::grid_search(X, y, grid, cv, policy(state)));
  label(state);
}

}  // namespace

BENCHMARK(BM_Betweenness)->ArgsProduct({{200, 800}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Load)->ArgsProduct({{200, 800}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Closeness)->ArgsProduct({{200, 800}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CurrentFlowBetweenness)->ArgsProduct({{100, 300}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitForest)->ArgsProduct({{1000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridSearch)->ArgsProduct({{500}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
