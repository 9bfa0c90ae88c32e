#include <benchmark/benchmark.h>

#include "hisense/hdc.hpp"

namespace hdc = hisense::hdc;

static void BM_Similarity(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto a = hdc::random_gaussian(d, 1);
  const auto b = hdc::random_gaussian(d, 2);
  for (auto _ : state) benchmark::DoNotOptimize(hdc::similarity(a, b));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Similarity)->Arg(1024)->Arg(10000);

static void BM_Bind(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto a = hdc::random_gaussian(d, 1);
  const auto k = hdc::random_bipolar(d, 2);
  for (auto _ : state) benchmark::DoNotOptimize(hdc::bind(a, k));
}
BENCHMARK(BM_Bind)->Arg(10000);

// Encoding a 64-dimensional CNN feature vector, the per-segment edge cost.
static void BM_Encode(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto enc = hdc::EncoderParams::generate(64, d, 3);
  std::vector<double> x(64, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(hdc::encode(x, enc));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Encode)->Arg(1024)->Arg(10000);

static void BM_ScoreAndClassify(benchmark::State& state) {
  const std::size_t d = 10000;
  const hdc::ClassModel m(hdc::random_gaussian(d, 1), hdc::random_gaussian(d, 2), 0.05, 0.1);
  const auto h = hdc::random_gaussian(d, 3);
  for (auto _ : state) benchmark::DoNotOptimize(hdc::classify(m, h));
}
BENCHMARK(BM_ScoreAndClassify);
