#include "hisense/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hisense/error.hpp"
#include "hisense/random.hpp"

namespace hisense::nn {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

Mlp::Mlp(std::size_t input_dim, std::size_t hidden, std::uint64_t seed)
    : input_dim_(input_dim), hidden_(hidden), params_(hidden * input_dim + 2 * hidden + 1, 0.0) {
  if (input_dim == 0 || hidden == 0) throw InvalidArgument("Mlp: dimensions must be positive");
  Rng rng(seed);
  const double s1 = std::sqrt(2.0 / static_cast<double>(input_dim));
  for (std::size_t i = 0; i < hidden * input_dim; ++i) params_[i] = rng.normal(0.0, s1);
  const double s2 = std::sqrt(2.0 / static_cast<double>(hidden));
  double* w2 = params_.data() + hidden * input_dim + hidden;
  for (std::size_t j = 0; j < hidden; ++j) w2[j] = rng.normal(0.0, s2);
}

double Mlp::logit(std::span<const double> x) const {
  if (x.size() != input_dim_) throw DimensionMismatch(x.size(), input_dim_, "Mlp input");
  const double* w1 = params_.data();
  const double* b1 = w1 + hidden_ * input_dim_;
  const double* w2 = b1 + hidden_;
  double z = w2[hidden_];
  for (std::size_t j = 0; j < hidden_; ++j) {
    const double a = std::inner_product(x.begin(), x.end(), w1 + j * input_dim_, b1[j]);
    if (a > 0.0) z += w2[j] * a;
  }
  return z;
}

double Mlp::probability(std::span<const double> x) const { return sigmoid(logit(x)); }

double Mlp::loss_and_gradient(std::span<const double> x, hdc::Label label, std::span<double> gradient) const {
  if (x.size() != input_dim_) throw DimensionMismatch(x.size(), input_dim_, "Mlp input");
  if (gradient.size() != params_.size()) throw DimensionMismatch(gradient.size(), params_.size(), "Mlp gradient");
  const double* w1 = params_.data();
  const double* b1 = w1 + hidden_ * input_dim_;
  const double* w2 = b1 + hidden_;
  std::vector<double> act(hidden_);
  double z = w2[hidden_];
  for (std::size_t j = 0; j < hidden_; ++j) {
    act[j] = std::max(0.0, std::inner_product(x.begin(), x.end(), w1 + j * input_dim_, b1[j]));
    z += w2[j] * act[j];
  }
  const double y = label == hdc::Label::kPositive ? 1.0 : 0.0;
  const double dz = sigmoid(z) - y;

  double* g1 = gradient.data();
  double* gb1 = g1 + hidden_ * input_dim_;
  double* g2 = gb1 + hidden_;
  g2[hidden_] += dz;
  for (std::size_t j = 0; j < hidden_; ++j) {
    g2[j] += dz * act[j];
    if (act[j] <= 0.0) continue;
    const double da = dz * w2[j];
    gb1[j] += da;
    for (std::size_t i = 0; i < input_dim_; ++i) g1[j * input_dim_ + i] += da * x[i];
  }
  return softplus(z) - y * z;
}

void Mlp::apply_step(std::span<const double> step) {
  if (step.size() != params_.size()) throw DimensionMismatch(step.size(), params_.size(), "Mlp step");
  for (std::size_t i = 0; i < params_.size(); ++i) params_[i] -= step[i];
}

Mlp train_mlp(std::span<const std::vector<double>> inputs, std::span<const hdc::Label> labels,
              const MlpConfig& config) {
  if (inputs.size() != labels.size()) throw DimensionMismatch(inputs.size(), labels.size(), "train_mlp inputs vs labels");
  const auto positives = std::count(labels.begin(), labels.end(), hdc::Label::kPositive);
  if (positives == 0 || positives == static_cast<std::ptrdiff_t>(labels.size())) {
    throw TrainingError("train_mlp: dataset must contain both labels");
  }
  if (config.batch_size == 0) throw InvalidArgument("train_mlp: batch_size must be positive");

  Mlp mlp(inputs.front().size(), config.hidden, config.seed);
  const std::size_t n = inputs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> grad(mlp.parameters().size());
  std::vector<double> velocity(grad.size(), 0.0);
  Rng rng(mix_seed(config.seed, 1));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t stop = std::min(n, start + config.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = start; i < stop; ++i) {
        const double loss = mlp.loss_and_gradient(inputs[order[i]], labels[order[i]], grad);
        if (!std::isfinite(loss)) {
          throw TrainingError("train_mlp: non-finite loss at epoch " + std::to_string(epoch));
        }
      }
      const double inv = 1.0 / static_cast<double>(stop - start);
      for (std::size_t p = 0; p < grad.size(); ++p) {
        velocity[p] = config.momentum * velocity[p] + grad[p] * inv;
        grad[p] = config.learning_rate * velocity[p];
      }
      mlp.apply_step(grad);
    }
  }
  return mlp;
}

}  // namespace hisense::nn
