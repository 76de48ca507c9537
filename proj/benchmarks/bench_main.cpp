#include <benchmark/benchmark.h>

#include "revision_eq/equilibrium_check.hpp"
#include "revision_eq/plan_synthesis.hpp"
#include "revision_eq/simulator.hpp"

namespace {

using namespace revision_eq;

void BM_SynthesizePd(benchmark::State& state) {
  auto pd = make_continuous_pd();
  const double T = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(synthesize_plan(pd, 1.0, T, 0.33));
}
BENCHMARK(BM_SynthesizePd)->Arg(10)->Arg(50)->Arg(500);

void BM_SynthesizeGtOde(benchmark::State& state) {
  auto pd = make_continuous_pd();
  SynthesisOptions o;
  o.tail_policy = TailPolicy::kGtOde;
  for (auto _ : state) benchmark::DoNotOptimize(synthesize_plan(pd, 1.0, 50.0, 0.33, o));
}
BENCHMARK(BM_SynthesizeGtOde);

void BM_VerifySpe(benchmark::State& state) {
  auto pd = make_continuous_pd();
  auto plan = synthesize_plan(pd, 1.0, 50.0, 0.33).plan.to_piecewise();
  const int grid = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(verify_spe(pd, plan, 0.33, 1.0, grid, 1e-6));
  state.SetItemsProcessed(state.iterations() * grid);
}
BENCHMARK(BM_VerifySpe)->Arg(1000)->Arg(10000);

void BM_RunBatch(benchmark::State& state) {
  auto pd = make_continuous_pd();
  SimConfig config;
  config.lambda = 1.0;
  config.T = static_cast<double>(state.range(0));
  config.error_rate = 0.1;
  config.replications = 10000;
  config.workers = 1;
  config.agents[0] = AgentSpec{StrategyKind::kLimitedRetaliation,
                               synthesize_plan(pd, 1.0, config.T, 0.33).plan.to_piecewise(), 0.33};
  config.agents[1] = config.agents[0];
  for (auto _ : state) benchmark::DoNotOptimize(run_batch(pd, config));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(config.replications));
}
BENCHMARK(BM_RunBatch)->Arg(5)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
