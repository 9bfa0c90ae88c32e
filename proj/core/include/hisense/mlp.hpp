#pragma once

// One-hidden-layer perceptron on frozen CNN features. It is the offline
// reference the online HDC model is compared against and is never updated
// after training.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hisense/hdc.hpp"

namespace hisense::nn {

struct MlpConfig {
  std::size_t hidden = 32;
  int epochs = 200;
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::size_t batch_size = 16;
  std::uint64_t seed = 3;
};

class Mlp {
 public:
  Mlp(std::size_t input_dim, std::size_t hidden, std::uint64_t seed);

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t hidden() const noexcept { return hidden_; }
  std::span<const double> parameters() const noexcept { return params_; }

  double logit(std::span<const double> x) const;
  // sigmoid(logit), in [0, 1].
  double probability(std::span<const double> x) const;

  // Binary cross-entropy of one sample; adds its gradient into `gradient`.
  double loss_and_gradient(std::span<const double> x, hdc::Label label, std::span<double> gradient) const;
  void apply_step(std::span<const double> step);

 private:
  // layout: w1[hidden][input], b1[hidden], w2[hidden], b2
  std::size_t input_dim_;
  std::size_t hidden_;
  std::vector<double> params_;
};

// Mini-batch SGD with momentum. Throws TrainingError on single-class data or
// a non-finite loss.
Mlp train_mlp(std::span<const std::vector<double>> inputs, std::span<const hdc::Label> labels,
              const MlpConfig& config);

}  // namespace hisense::nn
