#include <benchmark/benchmark.h>

#include <random>

#include "proxident/tensor.hpp"

using namespace proxident;

namespace {

CpFactors random_factors(std::size_t dim, std::size_t rank, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  auto fill = [&] {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(rank));
    for (auto& x : m.reshaped()) x = u(rng);
    return m;
  };
  return {fill(), fill(), fill()};
}

}  // namespace

static void BM_KRank(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Eigen::MatrixXd m = random_factors(n, n, 1).a;
  for (auto _ : state) benchmark::DoNotOptimize(k_rank(m, 1e-9));
}
BENCHMARK(BM_KRank)->DenseRange(2, 8);

static void BM_RecoverCp(benchmark::State& state) {
  const auto r = static_cast<std::size_t>(state.range(0));
  const ThreeWayArray t = random_factors(r + 2, r, 3).reconstruct();
  for (auto _ : state) benchmark::DoNotOptimize(recover_cp(t, r, {.seed = 9}));
}
BENCHMARK(BM_RecoverCp)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

static void BM_RecoverCpNoAlgebraicStart(benchmark::State& state) {
  const auto r = static_cast<std::size_t>(state.range(0));
  const ThreeWayArray t = random_factors(r + 2, r, 3).reconstruct();
  CpOptions o;
  o.seed = 9;
  o.algebraic_start = false;
  for (auto _ : state) benchmark::DoNotOptimize(recover_cp(t, r, o));
}
BENCHMARK(BM_RecoverCpNoAlgebraicStart)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);
