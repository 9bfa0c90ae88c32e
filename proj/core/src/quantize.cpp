#include "hisense/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hisense/binary_io.hpp"
#include "hisense/error.hpp"

namespace hisense::nn {

namespace {

constexpr std::int32_t kInputZeroPoint = 0;
constexpr std::int32_t kReluZeroPoint = -128;

std::int8_t saturate_i8(long v) {
  return static_cast<std::int8_t>(std::clamp(v, -128L, 127L));
}

std::int32_t saturating_rounding_doubling_high_mul(std::int32_t a, std::int32_t b) {
  if (a == b && a == std::numeric_limits<std::int32_t>::min()) {
    return std::numeric_limits<std::int32_t>::max();
  }
  const std::int64_t ab = static_cast<std::int64_t>(a) * static_cast<std::int64_t>(b);
  const std::int64_t nudge = ab >= 0 ? (std::int64_t{1} << 30) : (1 - (std::int64_t{1} << 30));
  return static_cast<std::int32_t>((ab + nudge) / (std::int64_t{1} << 31));
}

std::int32_t rounding_divide_by_pot(std::int32_t x, int exponent) {
  if (exponent <= 0) return x;
  const std::int32_t mask = static_cast<std::int32_t>((std::int64_t{1} << exponent) - 1);
  const std::int32_t remainder = x & mask;
  const std::int32_t threshold = (mask >> 1) + (x < 0 ? 1 : 0);
  return (x >> exponent) + (remainder > threshold ? 1 : 0);
}

QuantParams relu_params(double max_value) {
  return {max_value > 0.0 ? max_value / 255.0 : 1.0, kReluZeroPoint};
}

QuantParams input_params(double max_abs) {
  return {max_abs > 0.0 ? max_abs / 127.0 : 1.0, kInputZeroPoint};
}

}  // namespace

QuantParams symmetric_params(std::span<const double> values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return {m > 0.0 ? m / 127.0 : 1.0, 0};
}

std::vector<std::int8_t> quantize_tensor(std::span<const double> values, const QuantParams& p) {
  std::vector<std::int8_t> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = saturate_i8(std::lround(values[i] / p.scale) + p.zero_point);
  }
  return out;
}

std::vector<double> dequantize_tensor(std::span<const std::int8_t> values, const QuantParams& p) {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - p.zero_point) * p.scale;
  return out;
}

FixedPointMultiplier to_fixed_point(double multiplier) {
  if (!(multiplier > 0.0) || !std::isfinite(multiplier)) {
    throw InvalidArgument("to_fixed_point: multiplier must be positive and finite");
  }
  int exponent = 0;
  const double frac = std::frexp(multiplier, &exponent);  // frac in [0.5, 1)
  auto mantissa = static_cast<std::int64_t>(std::llround(frac * 2147483648.0));
  if (mantissa == (std::int64_t{1} << 31)) {
    mantissa /= 2;
    ++exponent;
  }
  return {static_cast<std::int32_t>(mantissa), exponent};
}

std::int32_t apply_multiplier(std::int32_t acc, const FixedPointMultiplier& m) {
  const int left = m.exponent > 0 ? m.exponent : 0;
  const int right = m.exponent > 0 ? 0 : -m.exponent;
  const std::int64_t shifted = static_cast<std::int64_t>(acc) * (std::int64_t{1} << left);
  const auto clamped = static_cast<std::int32_t>(std::clamp<std::int64_t>(
      shifted, std::numeric_limits<std::int32_t>::min(), std::numeric_limits<std::int32_t>::max()));
  return rounding_divide_by_pot(saturating_rounding_doubling_high_mul(clamped, m.mantissa), right);
}

QuantizedConvNet::QuantizedConvNet(ConvNetConfig config, std::vector<QuantizedLayer> layers,
                                   std::vector<double> head, std::vector<QuantParams> activations)
    : config_(std::move(config)),
      layers_(std::move(layers)),
      head_(std::move(head)),
      activations_(std::move(activations)) {
  config_.validate();
  if (layers_.size() != static_cast<std::size_t>(config_.num_conv_layers)) {
    throw ShapeError("QuantizedConvNet: layer count does not match config");
  }
  int cin = 1;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto cout = static_cast<std::size_t>(config_.channels[l]);
    if (layers_[l].kernel.size() != cout * static_cast<std::size_t>(cin) * 9 || layers_[l].bias.size() != cout) {
      throw ShapeError("QuantizedConvNet: tensor shape mismatch in layer " + std::to_string(l));
    }
    cin = config_.channels[l];
  }
  if (head_.size() != static_cast<std::size_t>(config_.feature_dim()) + 1) {
    throw ShapeError("QuantizedConvNet: head size mismatch");
  }
  if (!activations_.empty() && activations_.size() != layers_.size() + 1) {
    throw ShapeError("QuantizedConvNet: activation parameter count mismatch");
  }
}

ConvNet QuantizedConvNet::dequantized() const {
  std::vector<double> params;
  for (const auto& layer : layers_) {
    const auto k = dequantize_tensor(layer.kernel, layer.weight);
    params.insert(params.end(), k.begin(), k.end());
    params.insert(params.end(), layer.bias.begin(), layer.bias.end());
  }
  params.insert(params.end(), head_.begin(), head_.end());
  return ConvNet(config_, std::move(params), true);
}

QuantizedConvNet quantize_int8(const ConvNet& net) {
  if (!net.trained()) throw StateError("quantize_int8: network has not been trained");
  std::vector<QuantizedLayer> layers;
  for (int l = 0; l < net.layers(); ++l) {
    QuantizedLayer q;
    q.weight = symmetric_params(net.kernel(l));
    q.kernel = quantize_tensor(net.kernel(l), q.weight);
    q.bias.assign(net.bias(l).begin(), net.bias(l).end());
    layers.push_back(std::move(q));
  }
  std::vector<double> head(net.head_weights().begin(), net.head_weights().end());
  head.push_back(net.head_bias());
  return QuantizedConvNet(net.config(), std::move(layers), std::move(head));
}

QuantizedConvNet calibrate(const QuantizedConvNet& qnet, std::span<const Spectrogram> calibration) {
  if (calibration.empty()) throw InvalidArgument("calibrate: empty calibration set");
  const ConvNet reference = qnet.dequantized();
  std::vector<double> maxima(qnet.layers().size() + 1, 0.0);
  for (const auto& s : calibration) {
    const auto m = activation_maxima(reference, s);
    for (std::size_t i = 0; i < maxima.size(); ++i) maxima[i] = std::max(maxima[i], m[i]);
  }
  std::vector<QuantParams> acts;
  acts.push_back(input_params(maxima[0]));
  for (std::size_t i = 1; i < maxima.size(); ++i) acts.push_back(relu_params(maxima[i]));

  auto layers = qnet.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const double bias_scale = acts[l].scale * layers[l].weight.scale;
    layers[l].bias_q.resize(layers[l].bias.size());
    for (std::size_t c = 0; c < layers[l].bias.size(); ++c) {
      const double q = std::round(layers[l].bias[c] / bias_scale);
      layers[l].bias_q[c] = static_cast<std::int32_t>(std::clamp(q, -2147483648.0, 2147483647.0));
    }
  }
  return QuantizedConvNet(qnet.config(), std::move(layers),
                          std::vector<double>(qnet.head().begin(), qnet.head().end()), std::move(acts));
}

QuantizedConvNet quantize_int8(const ConvNet& net, std::span<const Spectrogram> calibration) {
  return calibrate(quantize_int8(net), calibration);
}

std::vector<double> forward_int8(const QuantizedConvNet& qnet, const Spectrogram& input) {
  if (!qnet.calibrated()) throw StateError("forward_int8: activations are not calibrated");
  const auto& cfg = qnet.config();
  const std::size_t min_side = cfg.min_input_side();
  if (input.frames() < min_side || input.bins() < min_side) {
    throw ShapeError("spectrogram too small for " + std::to_string(cfg.num_conv_layers) +
                     " conv layers; minimum input shape is " + std::to_string(min_side) + "x" +
                     std::to_string(min_side));
  }
  const auto& acts = qnet.activations();

  int h = static_cast<int>(input.frames());
  int w = static_cast<int>(input.bins());
  int cin = 1;
  std::vector<std::int8_t> current = quantize_tensor(input.values(), acts[0]);
  std::vector<std::int32_t> padded;
  std::vector<std::int32_t> acc;
  std::vector<std::int8_t> activated;

  for (std::size_t l = 0; l < qnet.layers().size(); ++l) {
    const auto& layer = qnet.layers()[l];
    const int cout = cfg.channels[l];
    const std::size_t wp = static_cast<std::size_t>(w) + 2;
    const std::size_t pplane = static_cast<std::size_t>(h + 2) * wp;
    const std::size_t plane = static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
    const std::int32_t zp_in = acts[l].zero_point;

    // Zero-point-corrected input with a border of (real) zeros.
    padded.assign(static_cast<std::size_t>(cin) * pplane, 0);
    for (int c = 0; c < cin; ++c) {
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          padded[static_cast<std::size_t>(c) * pplane + static_cast<std::size_t>(y + 1) * wp + static_cast<std::size_t>(x + 1)] =
              current[static_cast<std::size_t>(c) * plane + static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] - zp_in;
        }
      }
    }

    const auto mult = to_fixed_point(acts[l].scale * layer.weight.scale / acts[l + 1].scale);
    const std::int32_t zp_out = acts[l + 1].zero_point;
    acc.resize(plane);
    activated.resize(static_cast<std::size_t>(cout) * plane);
    for (int co = 0; co < cout; ++co) {
      std::fill(acc.begin(), acc.end(), layer.bias_q[static_cast<std::size_t>(co)]);
      for (int ci = 0; ci < cin; ++ci) {
        const std::int32_t* src = padded.data() + static_cast<std::size_t>(ci) * pplane;
        const std::int8_t* k = layer.kernel.data() + (static_cast<std::size_t>(co) * static_cast<std::size_t>(cin) + static_cast<std::size_t>(ci)) * 9;
        for (int y = 0; y < h; ++y) {
          std::int32_t* row = acc.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(w);
          for (int ky = 0; ky < 3; ++ky) {
            const std::int32_t* srow = src + static_cast<std::size_t>(y + ky) * wp;
            const std::int32_t k0 = k[ky * 3];
            const std::int32_t k1 = k[ky * 3 + 1];
            const std::int32_t k2 = k[ky * 3 + 2];
            for (int x = 0; x < w; ++x) {
              row[x] += k0 * srow[x] + k1 * srow[x + 1] + k2 * srow[x + 2];
            }
          }
        }
      }
      std::int8_t* out = activated.data() + static_cast<std::size_t>(co) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        const std::int32_t scaled = std::max(apply_multiplier(acc[i], mult), 0);
        out[i] = saturate_i8(static_cast<long>(scaled) + zp_out);
      }
    }

    const int ho = h / 2;
    const int wo = w / 2;
    std::vector<std::int8_t> pooled(static_cast<std::size_t>(cout) * static_cast<std::size_t>(ho) * static_cast<std::size_t>(wo));
    for (int c = 0; c < cout; ++c) {
      const std::int8_t* p = activated.data() + static_cast<std::size_t>(c) * plane;
      for (int py = 0; py < ho; ++py) {
        for (int px = 0; px < wo; ++px) {
          const std::size_t base = static_cast<std::size_t>(2 * py) * static_cast<std::size_t>(w) + static_cast<std::size_t>(2 * px);
          pooled[(static_cast<std::size_t>(c) * static_cast<std::size_t>(ho) + static_cast<std::size_t>(py)) * static_cast<std::size_t>(wo) + static_cast<std::size_t>(px)] =
              std::max({p[base], p[base + 1], p[base + static_cast<std::size_t>(w)], p[base + static_cast<std::size_t>(w) + 1]});
        }
      }
    }
    current = std::move(pooled);
    h = ho;
    w = wo;
    cin = cout;
  }

  const auto& last = acts.back();
  const std::size_t area = static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
  std::vector<double> features(static_cast<std::size_t>(cin));
  for (int c = 0; c < cin; ++c) {
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < area; ++i) sum += current[static_cast<std::size_t>(c) * area + i] - last.zero_point;
    features[static_cast<std::size_t>(c)] = last.scale * static_cast<double>(sum) / static_cast<double>(area);
  }
  return features;
}

void save_quantized(const std::filesystem::path& path, const QuantizedConvNet& qnet) {
  io::BinaryWriter w;
  w.magic("HSQ8");
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(qnet.config().num_conv_layers));
  for (int c : qnet.config().channels) w.u32(static_cast<std::uint32_t>(c));
  w.u64(qnet.config().seed);
  for (const auto& layer : qnet.layers()) {
    w.f64(layer.weight.scale);
    w.i32(layer.weight.zero_point);
    w.i8_array(layer.kernel);
    w.f64_array(layer.bias);
    w.i32_array(layer.bias_q);
  }
  w.f64_array(qnet.head());
  w.u32(static_cast<std::uint32_t>(qnet.activations().size()));
  for (const auto& a : qnet.activations()) {
    w.f64(a.scale);
    w.i32(a.zero_point);
  }
  w.save(path);
}

QuantizedConvNet load_quantized(const std::filesystem::path& path) {
  auto r = io::BinaryReader::open(path);
  r.expect_magic("HSQ8");
  if (r.u32() != 1) throw FormatError("unsupported HSQ8 version");
  ConvNetConfig config;
  config.num_conv_layers = static_cast<int>(r.u32());
  if (config.num_conv_layers < 1 || config.num_conv_layers > 16) throw FormatError("HSQ8: bad layer count");
  config.channels.clear();
  for (int l = 0; l < config.num_conv_layers; ++l) config.channels.push_back(static_cast<int>(r.u32()));
  config.seed = r.u64();
  std::vector<QuantizedLayer> layers;
  for (int l = 0; l < config.num_conv_layers; ++l) {
    QuantizedLayer q;
    q.weight.scale = r.f64();
    q.weight.zero_point = r.i32();
    q.kernel = r.i8_array();
    q.bias = r.f64_array();
    q.bias_q = r.i32_array();
    layers.push_back(std::move(q));
  }
  auto head = r.f64_array();
  const auto n_acts = r.u32();
  std::vector<QuantParams> acts(n_acts);
  for (auto& a : acts) {
    a.scale = r.f64();
    a.zero_point = r.i32();
  }
  return QuantizedConvNet(std::move(config), std::move(layers), std::move(head), std::move(acts));
}

}  // namespace hisense::nn
