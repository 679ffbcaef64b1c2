#include <benchmark/benchmark.h>

#include "proxident/bridge.hpp"
#include "proxident/harness.hpp"
#include "proxident/latent.hpp"
#include "proxident/models.hpp"

using namespace proxident;

namespace {

FullLaw square_observed(std::size_t u) {
  ModelSpec s;
  const std::string n = std::to_string(u);
  s.cardinalities = parse_cardinalities("U=" + n + ",Z=" + n + ",W=" + n + ",Y=4,A=2");
  s.constraints.force_invertible = true;
  s.constraints.force_distinct_rows = true;
  s.seed = 17;
  return marginalize(generate(s), {"A", "Y", "W", "Z"});
}

}  // namespace

static void BM_IdentifyBridge(benchmark::State& state) {
  const FullLaw obs = square_observed(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(identify_bridge(obs));
}
BENCHMARK(BM_IdentifyBridge)->DenseRange(2, 6);

static void BM_RecoverEigen(benchmark::State& state) {
  const FullLaw obs = square_observed(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(recover_eigen(obs));
}
BENCHMARK(BM_RecoverEigen)->DenseRange(2, 6);

static void BM_Audit(benchmark::State& state) {
  ModelSpec s;
  s.cardinalities = parse_cardinalities("U=3,Z=3,W=3,Y=4,A=2");
  s.seed = 5;
  const FullLaw law = generate(s);
  for (auto _ : state) benchmark::DoNotOptimize(audit(law, Structure::Fig3ProxyPair));
}
BENCHMARK(BM_Audit);
