#pragma once

// Small convolutional feature extractor. Each layer is a 3x3 "same"
// convolution, ReLU, and 2x2 max pool (floor). The last pooled map is
// globally average pooled into the feature vector; a linear head on top of
// the features produces a logit used only while training offline.
//
// All parameters live in one flat vector:
//   for each layer l: kernel[out][in][3][3], bias[out]
//   head weights[feature_dim], head bias
// which keeps SGD, serialization and gradient checking layout-agnostic.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "hisense/audio.hpp"
#include "hisense/hdc.hpp"

namespace hisense::nn {

using audio::Spectrogram;
using hdc::Label;

struct ConvNetConfig {
  int num_conv_layers = 5;
  std::vector<int> channels = {8, 16, 32, 32, 64};
  std::uint64_t seed = 1;

  // Channel schedule 8, 16, 32, 32, 64 truncated to `layers`; deeper nets
  // repeat 64.
  static ConvNetConfig with_layers(int layers, std::uint64_t seed = 1);

  int feature_dim() const { return channels.back(); }
  // Smallest spectrogram side that survives every pooling stage.
  std::size_t min_input_side() const { return std::size_t{1} << num_conv_layers; }
  void validate() const;

  friend bool operator==(const ConvNetConfig&, const ConvNetConfig&) = default;
};

class ConvNet {
 public:
  // He-normal kernels and head, zero biases, drawn from config.seed.
  explicit ConvNet(ConvNetConfig config);
  // Adopts existing parameters; throws ShapeError if the count is wrong or
  // InvalidArgument if any value is non-finite.
  ConvNet(ConvNetConfig config, std::vector<double> parameters, bool trained);

  const ConvNetConfig& config() const noexcept { return config_; }
  int layers() const noexcept { return config_.num_conv_layers; }
  int in_channels(int layer) const { return layer == 0 ? 1 : config_.channels[static_cast<std::size_t>(layer - 1)]; }
  int out_channels(int layer) const { return config_.channels[static_cast<std::size_t>(layer)]; }

  std::span<const double> parameters() const noexcept { return params_; }
  std::span<double> mutable_parameters() noexcept { return params_; }
  std::size_t parameter_count() const noexcept { return params_.size(); }

  std::size_t kernel_offset(int layer) const { return offsets_[static_cast<std::size_t>(layer)]; }
  std::size_t bias_offset(int layer) const;
  std::size_t head_offset() const { return offsets_.back(); }
  std::span<const double> kernel(int layer) const;
  std::span<const double> bias(int layer) const;
  std::span<const double> head_weights() const;
  double head_bias() const { return params_.back(); }

  bool trained() const noexcept { return trained_; }
  void set_trained(bool trained) noexcept { trained_ = trained; }
  const std::vector<double>& loss_history() const noexcept { return loss_history_; }
  void append_loss(double loss) { loss_history_.push_back(loss); }

  static std::size_t parameter_count_for(const ConvNetConfig& config);

 private:
  ConvNetConfig config_;
  std::vector<std::size_t> offsets_;  // kernel offset per layer, then head
  std::vector<double> params_;
  bool trained_ = false;
  std::vector<double> loss_history_;
};

struct ForwardResult {
  std::vector<double> features;
  double logit = 0.0;
};

// Throws ShapeError naming the minimum input shape when the spectrogram
// cannot survive all pooling stages.
ForwardResult forward(const ConvNet& net, const Spectrogram& input);

// Requires net.trained(); the linear head is ignored.
std::vector<double> extract_features(const ConvNet& net, const Spectrogram& input);

// Per-tensor maxima used for activation calibration: entry 0 is max|input|,
// entry l (1..L) is the maximum post-ReLU value produced by layer l-1.
std::vector<double> activation_maxima(const ConvNet& net, const Spectrogram& input);

// Binary cross-entropy of sigmoid(logit) against the label.
double bce_loss(double logit, Label label);

// Loss of one sample; adds d(loss)/d(parameters) into `gradient`
// (same layout as parameters()).
double loss_and_gradient(const ConvNet& net, const Spectrogram& input, Label label,
                         std::span<double> gradient);

struct TrainingExample {
  std::reference_wrapper<const Spectrogram> input;
  Label label;
};

double mean_loss(const ConvNet& net, std::span<const TrainingExample> samples);
double accuracy(const ConvNet& net, std::span<const TrainingExample> samples);

struct SgdOptions {
  int epochs = 30;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t batch_size = 32;
  std::uint64_t shuffle_seed = 7;
};

// Mini-batch SGD with momentum on the head's binary cross-entropy. Sample
// order is reshuffled every epoch from shuffle_seed. Appends the mean
// training loss of each epoch to the returned net's loss history.
// Throws TrainingError for a single-class dataset or a non-finite loss.
ConvNet train_offline(const ConvNet& net, std::span<const TrainingExample> samples,
                      const SgdOptions& options);

struct GradientCheckOptions {
  double step = 1e-5;
  double fraction = 0.01;  // share of parameters probed, at least one
  std::uint64_t seed = 11;
  // Test hook applied to the analytic gradient before comparison.
  std::function<void(std::span<double>)> corrupt;
};

// Max over the probed parameters of |analytic - numeric| /
// max(|analytic|, |numeric|, 1e-6), numeric by central differences.
double gradient_check(const ConvNet& net, const Spectrogram& input, Label label,
                      const GradientCheckOptions& options = {});

// Container "HSCN": config, flat parameters, trained flag, loss history and
// an opaque provenance string.
void save_convnet(const std::filesystem::path& path, const ConvNet& net,
                  const std::string& provenance = {});
ConvNet load_convnet(const std::filesystem::path& path);

}  // namespace hisense::nn
