#include <benchmark/benchmark.h>

#include "subq/contact_center.hpp"
#include "subq/synthetic.hpp"

using namespace subq;

static void BM_StackedDesign(benchmark::State& state) {
  const int B = static_cast<int>(state.range(0));
  const int S = static_cast<int>(state.range(1));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto d = stacked_design(B, S, 6, RandomStream(seed++));
    benchmark::DoNotOptimize(d.rows.data());
  }
}
BENCHMARK(BM_StackedDesign)->Args({100, 1})->Args({8, 64})->Args({5, 2});

static void BM_GrowTree(benchmark::State& state) {
  const int B = static_cast<int>(state.range(0));
  RandomStream root(1);
  const auto design = deduplicate(stacked_design(B, 1, 4, root.derive(0)));
  OutputTable table;
  table.design = design;
  table.n = 50;
  RandomStream s = root.derive(1);
  double total = 0.0;
  for (std::size_t r = 0; r < design.rows.size(); ++r) {
    std::vector<double> reps(50);
    for (auto& v : reps) v = s.next_normal(0.0, 5.0);
    table.config_means.push_back(mean(reps));
    for (double v : reps) total += v;
    table.outputs.push_back(std::move(reps));
  }
  table.grand_mean = total / static_cast<double>(design.rows.size() * 50);
  for (auto _ : state) {
    auto tree = grow_tree(table);
    benchmark::DoNotOptimize(tree.get());
  }
}
BENCHMARK(BM_GrowTree)->Arg(50)->Arg(100)->Arg(500);

static void BM_BaggedImportance(benchmark::State& state) {
  RandomStream root(2);
  const auto design = deduplicate(stacked_design(100, 1, 4, root.derive(0)));
  OutputTable table;
  table.design = design;
  table.n = 50;
  RandomStream s = root.derive(1);
  double total = 0.0;
  for (std::size_t r = 0; r < design.rows.size(); ++r) {
    std::vector<double> reps(50);
    for (auto& v : reps) v = s.next_normal(0.0, 5.0);
    table.config_means.push_back(mean(reps));
    for (double v : reps) total += v;
    table.outputs.push_back(std::move(reps));
  }
  table.grand_mean = total / static_cast<double>(design.rows.size() * 50);
  for (auto _ : state) {
    auto rep = bagged_importance(table, static_cast<int>(state.range(0)),
                                 BagWeighting::Uniform, root.derive(2));
    benchmark::DoNotOptimize(rep.per_submodel.data());
  }
}
BENCHMARK(BM_BaggedImportance)->Arg(10)->Arg(50);

static void BM_SimulateEpoch(benchmark::State& state) {
  const CenterConfig cfg;
  const auto instances = center_true_instances(cfg);
  const auto start = CenterState::empty(cfg);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    RandomStream s(seed++);
    auto result = simulate_epoch(cfg, instances, start, s);
    benchmark::DoNotOptimize(result.kpi);
  }
}
BENCHMARK(BM_SimulateEpoch);

static void BM_SimulateDay(benchmark::State& state) {
  const CenterConfig cfg;
  const auto instances = center_true_instances(cfg);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto day = simulate_day(cfg, instances, RandomStream(seed++));
    benchmark::DoNotOptimize(day.epoch_kpis.data());
  }
}
BENCHMARK(BM_SimulateDay);

static void BM_SyntheticReplicate(benchmark::State& state) {
  const SyntheticTruth truth;
  const auto instances = truth.true_instances();
  SyntheticModel model;
  RandomStream root(3);
  std::uint64_t i = 0;
  for (auto _ : state) {
    RandomStream s = root.derive(i++);
    benchmark::DoNotOptimize(model.replicate(instances, nullptr, s));
  }
}
BENCHMARK(BM_SyntheticReplicate);

BENCHMARK_MAIN();
