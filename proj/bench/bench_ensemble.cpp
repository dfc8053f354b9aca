#include <benchmark/benchmark.h>

#include "jumphedge/config.hpp"
#include "jumphedge/ensemble.hpp"
#include "jumphedge/experiment.hpp"
#include "jumphedge/hedging.hpp"

using namespace jumphedge;

namespace {

const ExperimentConfig kModel = hull_white_jump_config(0.0);

void BM_TerminalsSerial(benchmark::State& st) {
  const auto dates = make_revision_grid(100, 1.0).dates;
  const EnsembleConfig e{static_cast<std::size_t>(st.range(0)), 1, 1, 0};
  for (auto _ : st) benchmark::DoNotOptimize(simulate_terminals_serial(kModel.model, dates, 4, e));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_TerminalsOpenMP(benchmark::State& st) {
  const auto dates = make_revision_grid(100, 1.0).dates;
  const EnsembleConfig e{static_cast<std::size_t>(st.range(0)), 1, 0, 0};
  for (auto _ : st) benchmark::DoNotOptimize(simulate_terminals(kModel.model, dates, 4, e));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_HedgeSerial(benchmark::State& st) {
  ExperimentConfig c = kModel;
  c.n_paths = static_cast<std::size_t>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(run_paths_serial(c, 100, 0));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_HedgeOpenMP(benchmark::State& st) {
  ExperimentConfig c = kModel;
  c.n_paths = static_cast<std::size_t>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(run_paths(c, 100, 0, 0));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

}  // namespace

BENCHMARK(BM_TerminalsSerial)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TerminalsOpenMP)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HedgeSerial)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HedgeOpenMP)->Arg(200)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
