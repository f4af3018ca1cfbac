#include <benchmark/benchmark.h>

#include <vector>

#include "robustssd/robust_ssd.hpp"

using namespace robustssd;

namespace {

constexpr std::size_t kReps = 200;

Scenario recipe_scenario(int which) {
  ClusteredGaussianParams clustered;
  clustered.dropout = DropoutModel{-2.5, -0.3, 0.0, 0.2, 0.0};
  PoissonCopulaParams poisson;
  poisson.log_rate = 1.5;
  poisson.frailty_variance = 0.06;
  poisson.copula = {CopulaKind::exchangeable, 0.3, {}};
  switch (which) {
    case 0: return Scenario("mean_diff", TwoArmNormalParams{0.3, 0.0, 1.0, 0.5});
    case 1: return Scenario("logistic", TwoArmBinaryParams{-0.5, 0.4, 0.5});
    case 2: return Scenario("logistic_bootstrap", TwoArmBinaryParams{-0.5, 0.4, 0.5},
                            AnalysisRecipe{RecipeKind::logistic, 100});
    case 3: return Scenario("gee_identity", clustered);
    default: return Scenario("gee_log", poisson);
  }
}

// Algorithm 1 throughput per analysis recipe: kReps repetitions at n = 100.
void BM_Algorithm1(benchmark::State& state) {
  const Scenario s = recipe_scenario(static_cast<int>(state.range(0)));
  const HypothesisSpec h = HypothesisSpec::one_sided_lower(0.0, 0.05);
  for (auto _ : state) {
    SimulationSettings settings{1, 0, StreamPurpose::replicate, 1};
    benchmark::DoNotOptimize(run_algorithm1(s, h, 100, kReps, settings));
  }
  state.SetLabel(s.label());
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * kReps));
}
BENCHMARK(BM_Algorithm1)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);

StudyDesign poisson_design() {
  StudyDesign d;
  d.hypothesis = HypothesisSpec::equivalence(-0.2876820724517809, 0.2876820724517809, 0.05);
  d.beta = 0.2;
  d.replications = 500;
  d.n0 = 40;
  d.strategy = N1Strategy{N1StrategyKind::user_fixed, 80, 0.0, std::nullopt};
  d.master_seed = 7;
  d.workers = 1;
  return d;
}

// Two-sample-size design against the 13-point sweep at equal R.
void BM_Algorithm2(benchmark::State& state) {
  const std::vector<Scenario> scenarios{recipe_scenario(4)};
  const StudyDesign d = poisson_design();
  for (auto _ : state) benchmark::DoNotOptimize(robust_ssd(scenarios, d));
}
BENCHMARK(BM_Algorithm2)->Unit(benchmark::kMillisecond);

void BM_NaiveSweep(benchmark::State& state) {
  const Scenario s = recipe_scenario(4);
  const StudyDesign d = poisson_design();
  std::vector<int> grid;
  for (int n = 30; n <= 90; n += 5) grid.push_back(n);
  for (auto _ : state) {
    SimulationSettings settings{d.master_seed, 0, StreamPurpose::naive_sweep, 1};
    benchmark::DoNotOptimize(naive_sweep(s, d.hypothesis, grid, d.replications, settings));
  }
}
BENCHMARK(BM_NaiveSweep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
