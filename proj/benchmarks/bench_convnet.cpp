#include <benchmark/benchmark.h>

#include "hisense/convnet.hpp"
#include "hisense/quantize.hpp"
#include "hisense/random.hpp"

namespace nn = hisense::nn;
using hisense::audio::Spectrogram;

namespace {

Spectrogram desk_input() {
  hisense::Rng rng(1);
  std::vector<double> v(62 * 65);
  for (double& x : v) x = rng.normal();
  return Spectrogram(62, 65, std::move(v), 128, 128, true);
}

nn::ConvNet trained_net(int layers) {
  nn::ConvNet net(nn::ConvNetConfig::with_layers(layers));
  net.set_trained(true);
  return net;
}

}  // namespace

static void BM_Forward(benchmark::State& state) {
  const auto net = trained_net(static_cast<int>(state.range(0)));
  const auto x = desk_input();
  for (auto _ : state) benchmark::DoNotOptimize(nn::forward(net, x));
}
BENCHMARK(BM_Forward)->DenseRange(1, 5);

static void BM_LossAndGradient(benchmark::State& state) {
  const auto net = trained_net(5);
  const auto x = desk_input();
  std::vector<double> g(net.parameter_count());
  for (auto _ : state) {
    benchmark::DoNotOptimize(nn::loss_and_gradient(net, x, hisense::hdc::Label::kPositive, g));
  }
}
BENCHMARK(BM_LossAndGradient);

static void BM_ForwardInt8(benchmark::State& state) {
  const auto net = trained_net(5);
  const auto x = desk_input();
  const std::vector<Spectrogram> cal{x};
  const auto q = nn::quantize_int8(net, cal);
  for (auto _ : state) benchmark::DoNotOptimize(nn::forward_int8(q, x));
}
BENCHMARK(BM_ForwardInt8);
