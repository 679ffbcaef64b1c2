#include <benchmark/benchmark.h>

#include "proxident/harness.hpp"

using namespace proxident;

static void BM_SearchNonnested(benchmark::State& state) {
  const auto jobs = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(search_nonnested(200, 11, CardinalityGrid::defaults(), {}, jobs, 4));
  }
}
BENCHMARK(BM_SearchNonnested)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

static void BM_Compare(benchmark::State& state) {
  ModelSpec s;
  s.cardinalities = parse_cardinalities("U=2,Z=2,W=2,Y=3,A=2");
  s.constraints.force_invertible = true;
  s.constraints.force_distinct_rows = true;
  s.seed = 3;
  const FullLaw law = generate(s);
  for (auto _ : state) benchmark::DoNotOptimize(run_comparison(law, Structure::Fig3ProxyPair));
}
BENCHMARK(BM_Compare)->Unit(benchmark::kMillisecond);
