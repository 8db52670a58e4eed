// Micro-benchmarks over the hot paths: tree and ensemble fitting, the
// chained-equations sweep loop, and both explainers. Sizes are small enough
// for quick local runs; pass --benchmark_filter to narrow further.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "imprint/evaluate.hpp"
#include "imprint/explain.hpp"
#include "imprint/impute.hpp"
#include "imprint/model.hpp"
#include "imprint/simulate.hpp"
#include "imprint/tree.hpp"

namespace {

using namespace imprint;

SynthSpec spec_for(std::size_t n_rows, std::size_t n_features) {
  SynthSpec spec;
  spec.n_rows = n_rows;
  spec.coefficients.assign(n_features, 1.0);
  for (std::size_t j = 0; j < n_features; ++j) {
    spec.coefficients[j] = 2.0 - 0.2 * static_cast<double>(j);
  }
  spec.noise_std = 0.5;
  spec.feature_correlation = 0.4;
  spec.seed = 9;
  return spec;
}

Dataset masked_data(std::size_t n_rows, std::size_t n_features, double rate) {
  Dataset complete = synth_generate(spec_for(n_rows, n_features));
  if (rate <= 0) return complete;
  MissingnessSpec miss;
  miss.mechanism = McarSpec{rate};
  miss.columns = {"x0", "x1"};
  return apply_missingness(complete, miss, 17).masked;
}

void bm_fit_tree(benchmark::State& state) {
  const Dataset ds = masked_data(static_cast<std::size_t>(state.range(0)), 8, 0.2);
  TrainParams params;
  params.max_depth = 5;
  params.min_leaf_rows = 10;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_tree(ds, params));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_fit_tree)->Arg(1000)->Arg(5000);

void bm_fit_boosted(benchmark::State& state) {
  const Dataset ds = masked_data(2000, 8, 0.2);
  TrainParams params;
  params.max_depth = 3;
  params.min_leaf_rows = 10;
  params.n_trees = static_cast<std::size_t>(state.range(0));
  params.learning_rate = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_boosted(ds, params));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_fit_boosted)->Arg(10)->Arg(50);

void bm_mice(benchmark::State& state) {
  const Dataset ds = masked_data(static_cast<std::size_t>(state.range(0)), 6, 0.3);
  const MiceStrategy params{10, 1e-4, 0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(mice_impute(ds, params));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_mice)->Arg(500)->Arg(2000);

void bm_shapley(benchmark::State& state) {
  const std::size_t d = static_cast<std::size_t>(state.range(0));
  const Dataset ds = masked_data(500, d, 0.0);
  TrainParams params;
  params.max_depth = 3;
  params.min_leaf_rows = 10;
  params.n_trees = 20;
  const Model model = fit_model(ds, ModelFamily::Boosted, params);
  const std::vector<double> row = ds.feature_row(0);
  const std::vector<double> baseline(d, 0.0);
  const OriginRow origins(d, CellOrigin::Observed);
  for (auto _ : state) {
    benchmark::DoNotOptimize(shapley_exact(model, row, baseline, origins));
  }
}
BENCHMARK(bm_shapley)->Arg(6)->Arg(10)->Arg(12);

void bm_lime(benchmark::State& state) {
  const Dataset ds = masked_data(500, 8, 0.0);
  TrainParams params;
  params.max_depth = 3;
  params.min_leaf_rows = 10;
  params.n_trees = 20;
  const Model model = fit_model(ds, ModelFamily::Boosted, params);
  const std::vector<double> row = ds.feature_row(0);
  const std::vector<ColumnStats> stats = feature_stats(ds);
  LimeParams lime;
  lime.n_samples = static_cast<std::size_t>(state.range(0));
  lime.seed = 3;
  const OriginRow origins(8, CellOrigin::Observed);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lime_local(model, row, stats, lime, origins));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_lime)->Arg(500)->Arg(2000);

}  // namespace

BENCHMARK_MAIN();
