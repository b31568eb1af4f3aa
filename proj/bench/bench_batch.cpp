// Serial reference vs OpenMP batch evaluation of seed sweeps and tuning
// grids.

#include <benchmark/benchmark.h>

#include <vector>

#include "sbr/batch.hpp"
#include "sbr/config.hpp"
#include "sbr/tune.hpp"

namespace {

sbr::ScenarioConfig base() {
  sbr::ScenarioConfig c = sbr::load_scenario(SBR_DEFAULT_CONFIG);
  c.duration = 5.0;
  return c;
}

void BM_SingleRun(benchmark::State& state) {
  const sbr::ScenarioConfig c = base();
  for (auto _ : state) benchmark::DoNotOptimize(sbr::run_summary(c));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SingleRun)->Unit(benchmark::kMillisecond);

void BM_SeedSweepSerial(benchmark::State& state) {
  const auto runs = sbr::seed_sweep(base(), 1, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sbr::run_batch_serial(runs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SeedSweepSerial)->Arg(16)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_SeedSweepParallel(benchmark::State& state) {
  const auto runs = sbr::seed_sweep(base(), 1, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sbr::run_batch(runs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = sbr::batch_threads();
}
BENCHMARK(BM_SeedSweepParallel)
    ->Arg(16)
    ->Arg(64)
    ->Arg(256)
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

void BM_TuneGrid(benchmark::State& state) {
  sbr::TuneSpec spec;
  spec.target = sbr::TuneTarget::OuterLoop;
  spec.points = static_cast<int>(state.range(0));
  spec.objective = sbr::Objective::Itae;
  const sbr::ScenarioConfig c = base();
  for (auto _ : state) benchmark::DoNotOptimize(sbr::tune(c, spec));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0) * state.range(0));
}
BENCHMARK(BM_TuneGrid)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
