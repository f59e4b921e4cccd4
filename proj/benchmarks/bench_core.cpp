#include <benchmark/benchmark.h>

#include "sage/estimator.hpp"
#include "sage/graph.hpp"
#include "sage/measurement.hpp"
#include "sage/resilience.hpp"
#include "sage/rng.hpp"

namespace {

sage::MeasurementModel identity_model(std::size_t agents, std::size_t m) {
  const auto e = static_cast<Eigen::Index>(m);
  return sage::MeasurementModel(m, std::vector<Eigen::MatrixXd>(agents, Eigen::MatrixXd::Identity(e, e)),
                                std::vector<Eigen::VectorXd>(agents, Eigen::VectorXd::Ones(e)));
}

sage::Graph connected_geometric(std::size_t n, double radius) {
  for (std::uint64_t seed = 1;; ++seed) {
    auto g = sage::random_geometric(n, radius, seed);
    if (g.connected()) return g;
  }
}

void BM_SageStep(benchmark::State& state) {
  const auto agents = static_cast<std::size_t>(state.range(0));
  const auto model = identity_model(agents, 2);
  const auto graph = connected_geometric(agents, 0.3);
  const auto w = sage::recommended_weights(sage::laplacian(graph), 5.0);
  sage::Rng rng(1);
  const Eigen::Vector2d theta(1, 1);
  sage::EstimatorState s(model);
  for (auto _ : state) {
    const auto y = model.clean_stacked(theta, rng);
    s = sage::sage_step(s, w, graph, y, model).state;
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(agents));
}
BENCHMARK(BM_SageStep)->Arg(50)->Arg(500);

void BM_DeltaA(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  sage::Rng rng(2);
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(k + 1), 4);
  for (Eigen::Index i = 0; i < rows.size(); ++i) rows(i) = rng.normal();
  const auto model = sage::MeasurementModel::from_rows(rows);
  sage::StreamSet attacked;
  for (std::size_t i = 0; i < k; ++i) attacked.push_back(i);
  for (auto _ : state) benchmark::DoNotOptimize(sage::delta_a(model, attacked));
}
BENCHMARK(BM_DeltaA)->Arg(6)->Arg(12)->Arg(18);

void BM_Laplacian(benchmark::State& state) {
  const auto graph = connected_geometric(static_cast<std::size_t>(state.range(0)), 0.2);
  for (auto _ : state) {
    const auto l = sage::laplacian(graph);
    benchmark::DoNotOptimize(sage::algebraic_connectivity(l));
  }
}
BENCHMARK(BM_Laplacian)->Arg(50)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
