#include <benchmark/benchmark.h>

#include <random>

#include "hpsteal/experiments.hpp"
#include "hpsteal/kernels.hpp"

namespace {

using namespace hpsteal;

Matrix random_points(Index n, Index m) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  Matrix X(n, m);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j) X(i, j) = normal(rng);
  return X;
}

void BM_GaussianKernelSerial(benchmark::State& state) {
  const Matrix X = random_points(state.range(0), 10);
  for (auto _ : state) benchmark::DoNotOptimize(serial::gaussian_kernel(X, X, 1.0));
}

void BM_GaussianKernelParallel(benchmark::State& state) {
  const Matrix X = random_points(state.range(0), 10);
  for (auto _ : state) benchmark::DoNotOptimize(gaussian_kernel(X, X, 1.0));
}

void BM_CrossValidateSerial(benchmark::State& state) {
  const Dataset ds = preprocess(synth_gaussian(state.range(0), 10, 1));
  const auto spec = AlgorithmSpec::make(Algorithm::L2LR);
  for (auto _ : state) benchmark::DoNotOptimize(serial::cross_validate(spec, ds, default_grid(), 5, {}, 0));
}

void BM_CrossValidateParallel(benchmark::State& state) {
  const Dataset ds = preprocess(synth_gaussian(state.range(0), 10, 1));
  const auto spec = AlgorithmSpec::make(Algorithm::L2LR);
  for (auto _ : state) benchmark::DoNotOptimize(cross_validate(spec, ds, default_grid(), 5, {}, 0));
}

}  // namespace

BENCHMARK(BM_GaussianKernelSerial)->Arg(256)->Arg(1024);
BENCHMARK(BM_GaussianKernelParallel)->Arg(256)->Arg(1024);
BENCHMARK(BM_CrossValidateSerial)->Arg(500);
BENCHMARK(BM_CrossValidateParallel)->Arg(500);

BENCHMARK_MAIN();
