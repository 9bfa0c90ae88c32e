#pragma once

// Post-training int8 quantization of the feature extractor.
//
// Weights are per-tensor symmetric (zero point 0, scale = max|w| / 127).
// The network input is quantized symmetrically; post-ReLU activations use
// the full int8 range with zero point -128. Convolutions accumulate in
// int32 and requantize with a fixed-point multiplier, so the forward pass is
// integer-only between the input quantization and the final dequantization
// of the pooled features.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hisense/convnet.hpp"

namespace hisense::nn {

struct QuantParams {
  double scale = 1.0;
  std::int32_t zero_point = 0;

  friend bool operator==(const QuantParams&, const QuantParams&) = default;
};

// scale = max|v| / 127, or 1 for an all-zero tensor.
QuantParams symmetric_params(std::span<const double> values);
std::vector<std::int8_t> quantize_tensor(std::span<const double> values, const QuantParams& p);
std::vector<double> dequantize_tensor(std::span<const std::int8_t> values, const QuantParams& p);

struct QuantizedLayer {
  std::vector<std::int8_t> kernel;
  QuantParams weight;
  std::vector<double> bias;          // float bias, kept for recalibration
  std::vector<std::int32_t> bias_q;  // scale = input scale * weight scale

  friend bool operator==(const QuantizedLayer&, const QuantizedLayer&) = default;
};

class QuantizedConvNet {
 public:
  QuantizedConvNet(ConvNetConfig config, std::vector<QuantizedLayer> layers,
                   std::vector<double> head, std::vector<QuantParams> activations = {});

  const ConvNetConfig& config() const noexcept { return config_; }
  const std::vector<QuantizedLayer>& layers() const noexcept { return layers_; }
  std::span<const double> head() const noexcept { return head_; }
  // num_conv_layers + 1 entries once calibrated: the network input, then the
  // output of every layer.
  const std::vector<QuantParams>& activations() const noexcept { return activations_; }
  bool calibrated() const noexcept { return !activations_.empty(); }

  // Float network carrying the dequantized kernels.
  ConvNet dequantized() const;

  friend bool operator==(const QuantizedConvNet&, const QuantizedConvNet&) = default;

 private:
  ConvNetConfig config_;
  std::vector<QuantizedLayer> layers_;
  std::vector<double> head_;
  std::vector<QuantParams> activations_;
};

// Requires a trained net; the result is not yet calibrated.
QuantizedConvNet quantize_int8(const ConvNet& net);
// Activation ranges are the maxima observed over `calibration` when running
// the dequantized network.
QuantizedConvNet calibrate(const QuantizedConvNet& qnet, std::span<const Spectrogram> calibration);
QuantizedConvNet quantize_int8(const ConvNet& net, std::span<const Spectrogram> calibration);

// Integer forward pass; returns dequantized pooled features. Throws
// StateError when the activations are uncalibrated.
std::vector<double> forward_int8(const QuantizedConvNet& qnet, const Spectrogram& input);

// Fixed-point multiplier (Q31 mantissa and power-of-two exponent) for a
// positive real multiplier.
struct FixedPointMultiplier {
  std::int32_t mantissa = 0;
  int exponent = 0;  // value = mantissa * 2^(exponent - 31)
};
FixedPointMultiplier to_fixed_point(double multiplier);
std::int32_t apply_multiplier(std::int32_t acc, const FixedPointMultiplier& m);

// Container "HSQ8": config, int8 kernels with scales and zero points,
// biases, float head, activation parameters.
void save_quantized(const std::filesystem::path& path, const QuantizedConvNet& qnet);
QuantizedConvNet load_quantized(const std::filesystem::path& path);

}  // namespace hisense::nn
