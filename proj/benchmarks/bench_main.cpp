#include <benchmark/benchmark.h>

#include <vector>

#include "gros/distribution.hpp"
#include "gros/galton.hpp"
#include "gros/contact.hpp"
#include "gros/limit_laws.hpp"
#include "gros/oracle.hpp"
#include "gros/rng.hpp"
#include "gros/verify.hpp"

namespace {

using namespace gros;

void BM_EmpiricalIndex(benchmark::State& state) {
  auto n = static_cast<std::size_t>(state.range(0));
  Distribution u{Uniform01{}};
  auto xs = u.sample(n, 1);
  auto ys = u.sample(n, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(empirical_index(xs, ys));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EmpiricalIndex)->Range(256, 16384)->Complexity();

void BM_EmpiricalIndexMixedSizes(benchmark::State& state) {
  Distribution u{Uniform01{}};
  auto xs = u.sample(3000, 1);
  auto ys = u.sample(2048, 2);
  for (auto _ : state) benchmark::DoNotOptimize(empirical_index(xs, ys));
}
BENCHMARK(BM_EmpiricalIndexMixedSizes);

void BM_PopulationIndexScan(benchmark::State& state) {
  Distribution f{PowerCrossQuantile{0.5}};
  Distribution u{Uniform01{}};
  for (auto _ : state) benchmark::DoNotOptimize(population_index(f, u));
}
BENCHMARK(BM_PopulationIndexScan);

void BM_BridgeOccupation(benchmark::State& state) {
  auto grid = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    BridgePath p = sample_bridge(grid, seed++);
    benchmark::DoNotOptimize(occupation_positive(p, {{0.0, 1.0}}));
  }
}
BENCHMARK(BM_BridgeOccupation)->Arg(1024)->Arg(4096);

void BM_InnerLimitSampler(benchmark::State& state) {
  Rng rng(7);
  for (auto _ : state)
    benchmark::DoNotOptimize(sample_t_inner(0.5, 2.0, 2.0, -1.0, 1.0, 0.5, rng));
}
BENCHMARK(BM_InnerLimitSampler);

void BM_ExtremalRenewalSampler(benchmark::State& state) {
  Rng rng(7);
  for (auto _ : state)
    benchmark::DoNotOptimize(sample_t_extremal(0, 1.0, 1.0, 0.5, rng));
}
BENCHMARK(BM_ExtremalRenewalSampler);

void BM_GaltonEnumeration(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(oracle::enumerate_galton_distribution(n));
}
BENCHMARK(BM_GaltonEnumeration)->DenseRange(4, 8, 2);

void BM_FindContacts(benchmark::State& state) {
  Distribution u{Uniform01{}};
  Distribution g{PowerTangentQuantile{2.0}};
  for (auto _ : state) benchmark::DoNotOptimize(find_contacts(u, g, 1 << 12));
}
BENCHMARK(BM_FindContacts);

}  // namespace

BENCHMARK_MAIN();
