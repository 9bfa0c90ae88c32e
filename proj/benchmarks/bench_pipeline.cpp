#include <benchmark/benchmark.h>

#include "hisense/energy.hpp"
#include "hisense/random.hpp"

namespace energy = hisense::energy;

namespace {

energy::ScoredStream random_stream(std::size_t n) {
  hisense::Rng rng(2);
  energy::ScoredStream s;
  for (std::size_t i = 0; i < n; ++i) {
    const bool a = rng.bernoulli(0.01);
    s.aoi.push_back(a);
    s.scores.push_back(rng.normal(a ? 0.5 : 0.0, 0.2));
  }
  return s;
}

}  // namespace

static void BM_Replay(benchmark::State& state) {
  const auto s = random_stream(static_cast<std::size_t>(state.range(0)));
  hisense::stream::PipelineConfig cfg;
  cfg.t_score = 0.3;
  for (auto _ : state) benchmark::DoNotOptimize(energy::replay(s, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Replay)->Arg(4000);

static void BM_TradeoffSweep(benchmark::State& state) {
  const auto s = random_stream(4000);
  const auto grid = energy::threshold_grid(-1.0, 1.0, 21);
  for (auto _ : state) {
    benchmark::DoNotOptimize(energy::tradeoff_sweep(s, {}, energy::EnergyParams{}, grid));
  }
}
BENCHMARK(BM_TradeoffSweep);
