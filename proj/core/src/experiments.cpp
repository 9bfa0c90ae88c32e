#include "hisense/experiments.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "hisense/error.hpp"
#include "hisense/pipeline.hpp"

namespace hisense::eval {

std::vector<SweepRow> model_size_sweep(std::span<const int> layer_counts, const model::LabeledSpectrograms& train,
                                       const model::LabeledSpectrograms& val, const model::FrontendConfig& frontend,
                                       const model::TrainConfig& base) {
  std::vector<SweepRow> rows;
  for (int layers : layer_counts) {
    model::TrainConfig cfg = base;
    cfg.convnet = nn::ConvNetConfig::with_layers(layers, base.convnet.seed);
    try {
      auto result = model::train_model(train, val, frontend, cfg);
      rows.push_back({layers, result.val_roc.auc, std::move(result.val_roc)});
    } catch (const Error& e) {
      throw TrainingError("model_size_sweep, layers=" + std::to_string(layers) + ": " + e.what());
    }
  }
  return rows;
}

void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepRow> rows,
                     const std::string& header_comment) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  out << "layers,auc\n";
  for (const auto& r : rows) out << r.layers << ',' << r.auc << '\n';
}

double MlpBaseline::probability(std::span<const double> raw_features) const {
  return mlp.probability(scaler.standardize(raw_features));
}

bool MlpBaseline::classify(std::span<const double> raw_features) const {
  return probability(raw_features) > threshold;
}

MlpBaseline mlp_baseline(std::span<const std::vector<double>> train_features, std::span<const hdc::Label> train_labels,
                         std::span<const std::vector<double>> val_features, std::span<const hdc::Label> val_labels,
                         const nn::MlpConfig& config, double target_fpr) {
  auto scaler = model::FeatureScaler::fit(train_features);
  std::vector<std::vector<double>> inputs;
  inputs.reserve(train_features.size());
  for (const auto& f : train_features) inputs.push_back(scaler.standardize(f));
  auto mlp = nn::train_mlp(inputs, train_labels, config);

  std::vector<double> scores;
  scores.reserve(val_features.size());
  for (const auto& f : val_features) scores.push_back(mlp.probability(scaler.standardize(f)));
  auto roc = model::roc_of(scores, val_labels);
  const auto choice = choose_threshold(roc, target_fpr);
  // Probabilities live in [0, 1]; step just below the ROC threshold.
  const double threshold = std::isinf(choice.threshold)
                               ? 1.0
                               : std::nextafter(choice.threshold, -std::numeric_limits<double>::infinity());
  std::vector<bool> pred;
  for (double s : scores) pred.push_back(s > threshold);
  const double f1 = window_f1(pred, val_labels, 0, pred.size());
  return {std::move(mlp), std::move(scaler), threshold, std::move(roc), f1};
}

double window_f1(const std::vector<bool>& predictions, std::span<const hdc::Label> truth, std::size_t begin,
                 std::size_t end) {
  if (predictions.size() != truth.size()) {
    throw DimensionMismatch(predictions.size(), truth.size(), "window_f1 predictions vs truth");
  }
  if (begin > end || end > truth.size()) throw InvalidArgument("window_f1: bad range");
  ConfusionCounts c;
  for (std::size_t i = begin; i < end; ++i) {
    const bool t = truth[i] == hdc::Label::kPositive;
    if (predictions[i]) {
      (t ? c.tp : c.fp)++;
    } else {
      (t ? c.fn : c.tn)++;
    }
  }
  if (c.tp + c.fp + c.fn == 0) return std::numeric_limits<double>::quiet_NaN();
  return f1_score(c);
}

std::vector<double> rolling_f1(const std::vector<bool>& predictions, std::span<const hdc::Label> truth,
                               std::size_t window) {
  if (window == 0) throw InvalidArgument("rolling_f1: window must be positive");
  std::vector<double> out(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const std::size_t begin = i + 1 >= window ? i + 1 - window : 0;
    out[i] = window_f1(predictions, truth, begin, i + 1);
  }
  return out;
}

OnlineTrace online_learning_experiment(std::span<const hdc::Hypervector> stream, std::span<const hdc::Label> truth,
                                       const hdc::ClassModel& model, const OnlineConfig& config) {
  if (stream.size() != truth.size()) throw DimensionMismatch(stream.size(), truth.size(), "online stream vs truth");
  if (config.feedback_period == 0) throw InvalidArgument("online_learning_experiment: feedback_period must be positive");

  OnlineTrace trace{{}, {}, {}, model};
  hdc::ClassModel& current = trace.final_model;
  stream::PipelineConfig cfg;
  cfg.buffer_capacity = config.buffer_capacity;
  cfg.t_score = current.t_score();
  cfg.scorer = [&](const audio::AudioSegment&, std::size_t i) { return hdc::score(current, stream[i]); };
  stream::RingBuffer buffer(config.buffer_capacity);
  stream::TransmissionLog log;
  const std::vector<double> one{0.0};
  std::vector<std::size_t> pending;

  for (std::size_t i = 0; i < stream.size(); ++i) {
    cfg.t_score = current.t_score();
    const auto decision = stream::step(cfg, buffer, audio::AudioSegment(one, 1, 1.0), log);
    trace.scores.push_back(log.events.back().score);
    trace.predictions.push_back(decision.transmit);
    pending.insert(pending.end(), decision.segment_ids.begin(), decision.segment_ids.end());

    if ((i + 1) % config.feedback_period != 0) continue;
    FeedbackRound round;
    round.at = i;
    round.inspected = pending.size();
    std::vector<hdc::Example> feedback;
    for (std::size_t j : pending) {
      if (feedback.size() >= config.feedback_budget) break;
      if (trace.predictions[j] != (truth[j] == hdc::Label::kPositive)) feedback.push_back({stream[j], truth[j]});
    }
    pending.clear();
    round.flagged = feedback.size();
    const std::size_t begin = i + 1 >= config.window ? i + 1 - config.window : 0;
    round.f1_before = window_f1(trace.predictions, truth.first(trace.predictions.size()), begin, i + 1);
    if (!feedback.empty()) current = hdc::online_update(current, feedback);
    std::vector<bool> rescored;
    for (std::size_t j = 0; j <= i; ++j) rescored.push_back(j >= begin && hdc::classify(current, stream[j]));
    round.f1_after = window_f1(rescored, truth.first(i + 1), begin, i + 1);
    trace.rounds.push_back(round);
  }
  return trace;
}

void write_online_csv(const std::filesystem::path& path, std::span<const hdc::Label> truth,
                      std::span<const NamedPredictions> series, std::size_t window,
                      const std::string& header_comment) {
  std::vector<std::vector<double>> f1;
  for (const auto& s : series) f1.push_back(rolling_f1(s.predictions, truth, window));
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  out << "index,truth";
  for (const auto& s : series) out << ',' << s.name << "_pred";
  for (const auto& s : series) out << ',' << s.name << "_f1";
  out << '\n';
  for (std::size_t i = 0; i < truth.size(); ++i) {
    out << i << ',' << (truth[i] == hdc::Label::kPositive ? 1 : 0);
    for (const auto& s : series) out << ',' << (s.predictions[i] ? 1 : 0);
    for (const auto& v : f1) {
      out << ',';
      if (!std::isnan(v[i])) out << v[i];
    }
    out << '\n';
  }
}

}  // namespace hisense::eval
