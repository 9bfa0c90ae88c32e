#include "hisense/near_sensor_model.hpp"

#include <algorithm>
#include <cmath>

#include "hisense/binary_io.hpp"
#include "hisense/error.hpp"

namespace hisense::model {

Spectrogram make_spectrogram(const AudioSegment& seg, const FrontendConfig& frontend) {
  if (seg.sample_rate() == frontend.sample_rate) return audio::stft_spectrogram(seg, frontend.stft);
  auto samples = audio::resample_linear(seg.samples(), seg.sample_rate(), frontend.sample_rate);
  const AudioSegment resampled(std::move(samples), frontend.sample_rate, frontend.seconds, seg.label(),
                               seg.source_id());
  return audio::stft_spectrogram(resampled, frontend.stft);
}

std::vector<Spectrogram> make_spectrograms(std::span<const AudioSegment> segments, const FrontendConfig& frontend) {
  std::vector<Spectrogram> out;
  out.reserve(segments.size());
  for (const auto& seg : segments) out.push_back(make_spectrogram(seg, frontend));
  return out;
}

FeatureScaler::FeatureScaler(std::vector<double> mean, std::vector<double> inv_std, double gain)
    : mean_(std::move(mean)), inv_std_(std::move(inv_std)), gain_(gain) {
  if (mean_.size() != inv_std_.size()) throw DimensionMismatch(mean_.size(), inv_std_.size(), "FeatureScaler");
  if (!(gain_ > 0.0) || !std::isfinite(gain_)) throw InvalidArgument("FeatureScaler: gain must be positive");
}

FeatureScaler FeatureScaler::fit(std::span<const std::vector<double>> features, double gain) {
  if (features.empty()) throw InvalidArgument("FeatureScaler::fit: no features");
  const std::size_t m = features.front().size();
  const auto n = static_cast<double>(features.size());
  std::vector<double> mean(m, 0.0);
  for (const auto& f : features) {
    if (f.size() != m) throw DimensionMismatch(f.size(), m, "FeatureScaler::fit");
    for (std::size_t i = 0; i < m; ++i) mean[i] += f[i];
  }
  for (double& v : mean) v /= n;
  std::vector<double> inv_std(m, 0.0);
  for (const auto& f : features) {
    for (std::size_t i = 0; i < m; ++i) inv_std[i] += (f[i] - mean[i]) * (f[i] - mean[i]);
  }
  for (double& v : inv_std) {
    const double sd = std::sqrt(v / n);
    v = sd > 1e-12 ? 1.0 / sd : 1.0;  // a dead feature is only centered
  }
  return FeatureScaler(std::move(mean), std::move(inv_std), gain);
}

std::vector<double> FeatureScaler::standardize(std::span<const double> x) const {
  if (x.size() != mean_.size()) throw DimensionMismatch(x.size(), mean_.size(), "FeatureScaler");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean_[i]) * inv_std_[i];
  return out;
}

std::vector<double> FeatureScaler::apply(std::span<const double> x) const {
  auto out = standardize(x);
  const double k = gain_ / std::sqrt(static_cast<double>(out.size()));
  for (double& v : out) v *= k;
  return out;
}

NearSensorModel::NearSensorModel(FrontendConfig frontend, nn::ConvNet net, FeatureScaler scaler,
                                 hdc::EncoderParams encoder, hdc::ClassModel classes)
    : frontend_(frontend),
      net_(std::move(net)),
      scaler_(std::move(scaler)),
      encoder_(std::move(encoder)),
      classes_(std::move(classes)) {
  const auto m = static_cast<std::size_t>(net_.config().feature_dim());
  if (scaler_.dim() != m) throw DimensionMismatch(scaler_.dim(), m, "NearSensorModel scaler vs CNN features");
  if (encoder_.feature_dim() != m) {
    throw DimensionMismatch(encoder_.feature_dim(), m, "NearSensorModel encoder vs CNN features");
  }
  if (encoder_.dim() != classes_.dim()) {
    throw DimensionMismatch(encoder_.dim(), classes_.dim(), "NearSensorModel encoder vs class vectors");
  }
}

NearSensorModel NearSensorModel::with_classes(hdc::ClassModel classes) const {
  return NearSensorModel(frontend_, net_, scaler_, encoder_, std::move(classes));
}

std::vector<double> NearSensorModel::features(const Spectrogram& s) const { return nn::extract_features(net_, s); }

hdc::Hypervector NearSensorModel::encode_features(std::span<const double> raw_features) const {
  return hdc::encode(scaler_.apply(raw_features), encoder_);
}

hdc::Hypervector NearSensorModel::hypervector(const Spectrogram& s) const { return encode_features(features(s)); }

hdc::Hypervector NearSensorModel::hypervector(const AudioSegment& seg) const {
  return hypervector(make_spectrogram(seg, frontend_));
}

double NearSensorModel::score(const AudioSegment& seg) const { return hdc::score(classes_, hypervector(seg)); }

bool NearSensorModel::classify(const AudioSegment& seg) const { return hdc::classify(classes_, hypervector(seg)); }

void save_model(const std::filesystem::path& dir, const NearSensorModel& model, const std::string& provenance) {
  std::filesystem::create_directories(dir);
  nn::save_convnet(dir / "convnet.bin", model.net(), provenance);
  hdc::save_model(dir / "hdc.bin", model.classes(), model.encoder(), provenance);
  io::BinaryWriter w;
  w.magic("HSFE");
  w.u32(1);
  w.str(provenance);
  w.i32(model.frontend().sample_rate);
  w.f64(model.frontend().seconds);
  w.u64(model.frontend().stft.frame_size);
  w.u64(model.frontend().stft.hop);
  w.f64(model.scaler().gain());
  w.f64_array(model.scaler().mean());
  w.f64_array(model.scaler().inv_std());
  w.save(dir / "frontend.bin");
}

NearSensorModel load_model(const std::filesystem::path& dir) {
  auto r = io::BinaryReader::open(dir / "frontend.bin");
  r.expect_magic("HSFE");
  if (r.u32() != 1) throw FormatError("unsupported HSFE version");
  r.str();
  FrontendConfig frontend;
  frontend.sample_rate = r.i32();
  frontend.seconds = r.f64();
  frontend.stft.frame_size = r.u64();
  frontend.stft.hop = r.u64();
  const double gain = r.f64();
  auto mean = r.f64_array();
  auto inv_std = r.f64_array();
  if (!r.at_end()) throw FormatError("HSFE: trailing bytes");
  auto hd = hdc::load_model(dir / "hdc.bin");
  return NearSensorModel(frontend, nn::load_convnet(dir / "convnet.bin"),
                         FeatureScaler(std::move(mean), std::move(inv_std), gain), std::move(hd.encoder),
                         std::move(hd.model));
}

LabeledSpectrograms labeled_spectrograms(std::span<const AudioSegment> segments, const FrontendConfig& frontend) {
  LabeledSpectrograms out;
  out.inputs.reserve(segments.size());
  out.labels.reserve(segments.size());
  for (const auto& seg : segments) {
    if (!seg.label()) throw InvalidArgument("labeled_spectrograms: segment " + seg.source_id() + " has no label");
    out.inputs.push_back(make_spectrogram(seg, frontend));
    out.labels.push_back(*seg.label());
  }
  return out;
}

std::vector<double> score_all(const NearSensorModel& model, std::span<const Spectrogram> inputs) {
  std::vector<double> out;
  out.reserve(inputs.size());
  for (const auto& s : inputs) out.push_back(hdc::score(model.classes(), model.hypervector(s)));
  return out;
}

eval::RocCurve roc_of(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) throw DimensionMismatch(scores.size(), labels.size(), "roc_of");
  std::vector<eval::ScoredLabel> pairs;
  pairs.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) pairs.push_back({scores[i], labels[i] == Label::kPositive});
  return eval::roc_curve(pairs);
}

TrainResult train_model(const LabeledSpectrograms& train, const LabeledSpectrograms& val,
                        const FrontendConfig& frontend, const TrainConfig& config) {
  if (train.inputs.size() != train.labels.size() || val.inputs.size() != val.labels.size()) {
    throw InvalidArgument("train_model: inputs and labels differ in length");
  }
  config.convnet.validate();

  std::vector<nn::TrainingExample> examples;
  examples.reserve(train.inputs.size());
  for (std::size_t i = 0; i < train.inputs.size(); ++i) examples.push_back({std::cref(train.inputs[i]), train.labels[i]});
  const auto net = nn::train_offline(nn::ConvNet(config.convnet), examples, config.sgd);

  std::vector<std::vector<double>> feats;
  feats.reserve(train.inputs.size());
  for (const auto& s : train.inputs) feats.push_back(nn::extract_features(net, s));
  auto scaler = FeatureScaler::fit(feats, config.encoder_gain);
  auto encoder = hdc::EncoderParams::generate(feats.front().size(), config.dim, config.hdc_seed);

  std::vector<hdc::Example> hvs;
  hvs.reserve(feats.size());
  std::size_t positives = 0;
  for (std::size_t i = 0; i < feats.size(); ++i) {
    hvs.push_back({hdc::encode(scaler.apply(feats[i]), encoder), train.labels[i]});
    if (train.labels[i] == Label::kPositive) ++positives;
  }

  // Centroids rather than raw sums, so alpha is relative to a typical
  // hypervector regardless of class sizes.
  auto classes = hdc::train_initial(hvs, config.alpha);
  classes = classes.with_classes(hdc::scale(classes.c_pos(), 1.0 / static_cast<double>(positives)),
                                 hdc::scale(classes.c_neg(), 1.0 / static_cast<double>(hvs.size() - positives)))
                .with_mode(config.mode);

  // A provisional threshold from the training scores gives retraining a
  // decision rule to correct.
  std::vector<double> train_scores;
  train_scores.reserve(hvs.size());
  for (const auto& ex : hvs) train_scores.push_back(hdc::score(classes, ex.hv));
  const auto train_roc = roc_of(train_scores, train.labels);
  classes = classes.with_threshold(
      config.t_score.value_or(eval::strict_threshold(eval::choose_threshold(train_roc, config.target_fpr).threshold)));

  std::vector<std::size_t> errors;
  for (int epoch = 0; epoch < config.retrain_epochs; ++epoch) {
    auto step = hdc::retrain_epoch(classes, hvs);
    errors.push_back(step.errors);
    if (step.errors == 0) break;
    classes = std::move(step.model);
  }

  NearSensorModel model(frontend, net, std::move(scaler), std::move(encoder), classes);
  const auto val_scores = score_all(model, val.inputs);
  auto val_roc = roc_of(val_scores, val.labels);
  auto choice = eval::choose_threshold(val_roc, config.target_fpr);
  const double t = config.t_score.value_or(eval::strict_threshold(choice.threshold));
  model = model.with_classes(model.classes().with_threshold(t));
  return {std::move(model), std::move(val_roc), choice, std::move(errors)};
}

}  // namespace hisense::model
