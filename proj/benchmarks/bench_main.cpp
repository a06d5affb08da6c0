#include <benchmark/benchmark.h>

#include <random>

#include "dmlspss/energy.hpp"
#include "dmlspss/learners.hpp"
#include "dmlspss/support_points.hpp"

namespace {

dmlspss::Matrix cloud(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  dmlspss::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = nd(rng);
  return m;
}

void BM_EnergyTwoSample(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const dmlspss::Matrix a = cloud(n / 5, 22, 1);
  const dmlspss::Matrix b = cloud(n, 22, 2);
  for (auto _ : state) benchmark::DoNotOptimize(dmlspss::energy_two_sample(a, b));
}
BENCHMARK(BM_EnergyTwoSample)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_SupportPoints(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const dmlspss::Matrix full = cloud(n, 22, 3);
  dmlspss::SpConfig cfg;
  cfg.n_points = static_cast<std::size_t>(n / 5);
  cfg.max_iter = 20;
  for (auto _ : state) benchmark::DoNotOptimize(dmlspss::compute_support_points(full, cfg));
}
BENCHMARK(BM_SupportPoints)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_RefineSubset(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const dmlspss::Matrix full = cloud(n, 22, 4);
  dmlspss::IndexList start;
  for (int i = 0; i < n / 5; ++i) start.push_back(static_cast<std::size_t>(i));
  for (auto _ : state) benchmark::DoNotOptimize(dmlspss::refine_subset(full, start, 10000));
}
BENCHMARK(BM_RefineSubset)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Ridge(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const dmlspss::Matrix x = cloud(n, 20, 5);
  const dmlspss::Vector y = cloud(n, 1, 6).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(dmlspss::fit({dmlspss::RidgeSpec{1.0}}, x, y));
}
BENCHMARK(BM_Ridge)->Arg(500)->Arg(5000)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
