#pragma once

// The deployable edge model: STFT frontend, frozen CNN feature extractor,
// feature standardization, HDC encoder and two-class model, plus the offline
// training workflow that produces it.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hisense/audio.hpp"
#include "hisense/convnet.hpp"
#include "hisense/hdc.hpp"
#include "hisense/metrics.hpp"

namespace hisense::model {

using audio::AudioSegment;
using audio::Spectrogram;
using hdc::Label;

struct FrontendConfig {
  int sample_rate = 22050;
  double seconds = 4.0;
  audio::StftParams stft{};

  // Reduced scale used with the synthetic data: 8 kHz, 1 s, 128-sample frames
  // without overlap (62 x 65 spectrograms).
  static FrontendConfig desk() { return {8000, 1.0, {128, 128}}; }

  friend bool operator==(const FrontendConfig&, const FrontendConfig&) = default;
};

Spectrogram make_spectrogram(const AudioSegment& seg, const FrontendConfig& frontend);
std::vector<Spectrogram> make_spectrograms(std::span<const AudioSegment> segments, const FrontendConfig& frontend);

// Per-feature z-score fitted on training features, times gain / sqrt(m) so the
// encoder's projections have roughly unit variance.
class FeatureScaler {
 public:
  FeatureScaler() = default;
  FeatureScaler(std::vector<double> mean, std::vector<double> inv_std, double gain);

  static FeatureScaler fit(std::span<const std::vector<double>> features, double gain = 1.0);

  std::size_t dim() const noexcept { return mean_.size(); }
  double gain() const noexcept { return gain_; }
  std::span<const double> mean() const noexcept { return mean_; }
  std::span<const double> inv_std() const noexcept { return inv_std_; }

  // z-score only.
  std::vector<double> standardize(std::span<const double> x) const;
  // z-score scaled for the encoder.
  std::vector<double> apply(std::span<const double> x) const;

  friend bool operator==(const FeatureScaler&, const FeatureScaler&) = default;

 private:
  std::vector<double> mean_;
  std::vector<double> inv_std_;
  double gain_ = 1.0;
};

class NearSensorModel {
 public:
  NearSensorModel(FrontendConfig frontend, nn::ConvNet net, FeatureScaler scaler, hdc::EncoderParams encoder,
                  hdc::ClassModel classes);

  const FrontendConfig& frontend() const noexcept { return frontend_; }
  const nn::ConvNet& net() const noexcept { return net_; }
  const FeatureScaler& scaler() const noexcept { return scaler_; }
  const hdc::EncoderParams& encoder() const noexcept { return encoder_; }
  const hdc::ClassModel& classes() const noexcept { return classes_; }

  NearSensorModel with_classes(hdc::ClassModel classes) const;

  std::vector<double> features(const Spectrogram& s) const;
  hdc::Hypervector encode_features(std::span<const double> raw_features) const;
  hdc::Hypervector hypervector(const Spectrogram& s) const;
  hdc::Hypervector hypervector(const AudioSegment& seg) const;
  double score(const AudioSegment& seg) const;
  bool classify(const AudioSegment& seg) const;

 private:
  FrontendConfig frontend_;
  nn::ConvNet net_;
  FeatureScaler scaler_;
  hdc::EncoderParams encoder_;
  hdc::ClassModel classes_;
};

// Writes convnet.bin, hdc.bin and frontend.bin into `dir`; each embeds
// `provenance`.
void save_model(const std::filesystem::path& dir, const NearSensorModel& model, const std::string& provenance = {});
NearSensorModel load_model(const std::filesystem::path& dir);

struct TrainConfig {
  nn::ConvNetConfig convnet = nn::ConvNetConfig::with_layers(5);
  nn::SgdOptions sgd{};
  std::size_t dim = 10000;
  std::uint64_t hdc_seed = 42;
  double alpha = hdc::ClassModel::kDefaultAlpha;
  double encoder_gain = 1.0;
  int retrain_epochs = 10;
  hdc::ScoreMode mode = hdc::ScoreMode::kPositiveSimilarity;
  double target_fpr = 0.05;
  // Fixed threshold; when absent it is chosen on validation at target_fpr.
  std::optional<double> t_score;
};

struct LabeledSpectrograms {
  std::vector<Spectrogram> inputs;
  std::vector<Label> labels;
};

LabeledSpectrograms labeled_spectrograms(std::span<const AudioSegment> segments, const FrontendConfig& frontend);

struct TrainResult {
  NearSensorModel model;
  eval::RocCurve val_roc;
  eval::ThresholdChoice val_choice;
  std::vector<std::size_t> retrain_errors;  // misclassifications per retraining pass
};

// Trains the CNN on `train` (already oversampled), bundles centroid class
// vectors from its features, retrains them, and fixes the threshold on `val`.
// Throws TrainingError.
TrainResult train_model(const LabeledSpectrograms& train, const LabeledSpectrograms& val,
                        const FrontendConfig& frontend, const TrainConfig& config);

std::vector<double> score_all(const NearSensorModel& model, std::span<const Spectrogram> inputs);
eval::RocCurve roc_of(std::span<const double> scores, std::span<const Label> labels);

}  // namespace hisense::model
