#include <benchmark/benchmark.h>

#include "lcrt/maximin.hpp"
#include "lcrt/parallel.hpp"

using namespace lcrt;

namespace {

const IccVector rho{0.1, 0.05, 0.1, 0.05, 0.04, 0.02, 0.5};
const IccBox box{{0.05, 0.025, 0.04, 0.02, 0.01, 0.005, 0.5}, {0.10, 0.040, 0.08, 0.032, 0.02, 0.01, 0.8}};
const EconModel econ{1, 3000, 20000, 4000, 0.05};

TrialLayout layout(int which) {
  if (which == 0) return {Family::crxo, 4};
  TrialLayout l{Family::sw, 9};
  l.Q = 3;
  return l;
}

void lod_parallel(benchmark::State& st) {
  const auto l = layout(int(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(lod_search(l, rho, econ, BudgetModel{}));
}

void lod_serial(benchmark::State& st) {
  const auto l = layout(int(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(lod_search_serial(l, rho, econ, BudgetModel{}));
}

void mmd_parallel(benchmark::State& st) {
  const auto l = layout(int(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(mmd_search(l, box, econ, BudgetModel{}));
}

void mmd_serial(benchmark::State& st) {
  const auto l = layout(int(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(mmd_search_serial(l, box, econ, BudgetModel{}));
}

}  // namespace

// arg 0 = crossover, 1 = stepped wedge
BENCHMARK(lod_parallel)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(lod_serial)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(mmd_parallel)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(mmd_serial)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
