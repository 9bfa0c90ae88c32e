#include <benchmark/benchmark.h>

#include <complex>

#include "hisense/audio.hpp"
#include "hisense/dataset.hpp"
#include "hisense/near_sensor_model.hpp"

namespace audio = hisense::audio;

static void BM_Fft(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<std::complex<double>> x(n, {0.5, -0.25});
  for (auto _ : state) {
    auto y = x;
    audio::fft_inplace(y);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_Fft)->RangeMultiplier(4)->Range(64, 4096);

static void BM_DeskSpectrogram(benchmark::State& state) {
  const auto item = hisense::data::synth_item(0, hisense::hdc::Label::kPositive, 1, {});
  const auto fe = hisense::model::FrontendConfig::desk();
  for (auto _ : state) benchmark::DoNotOptimize(hisense::model::make_spectrogram(item.segment, fe));
}
BENCHMARK(BM_DeskSpectrogram);

// Full-scale frontend: 4 s at 22.05 kHz, 1024/512 frames.
static void BM_FullSpectrogram(benchmark::State& state) {
  std::vector<double> x(22050 * 4);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.1 * static_cast<double>((i * 7919) % 200) / 200.0 - 0.05;
  const audio::AudioSegment seg(x, 22050, 4.0);
  for (auto _ : state) benchmark::DoNotOptimize(audio::stft_spectrogram(seg, {1024, 512}));
}
BENCHMARK(BM_FullSpectrogram);

static void BM_SynthItem(benchmark::State& state) {
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hisense::data::synth_item(i++, hisense::hdc::Label::kPositive, 1, {}));
  }
}
BENCHMARK(BM_SynthItem);
