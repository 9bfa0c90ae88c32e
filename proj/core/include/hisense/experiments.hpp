#pragma once

// Experiment harnesses: the model-size sweep, the MLP baseline, and the
// online-learning run against a simulated cloud oracle.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hisense/hdc.hpp"
#include "hisense/metrics.hpp"
#include "hisense/mlp.hpp"
#include "hisense/near_sensor_model.hpp"

namespace hisense::eval {

struct SweepRow {
  int layers = 0;
  double auc = 0.0;
  RocCurve roc;
};

// Trains one model per layer count (channel schedule from
// ConvNetConfig::with_layers) and reports validation AUC. Training failures
// are rethrown as TrainingError naming the layer count.
std::vector<SweepRow> model_size_sweep(std::span<const int> layer_counts, const model::LabeledSpectrograms& train,
                                       const model::LabeledSpectrograms& val, const model::FrontendConfig& frontend,
                                       const model::TrainConfig& base);

void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepRow> rows,
                     const std::string& header_comment = {});

struct MlpBaseline {
  nn::Mlp mlp;
  model::FeatureScaler scaler;  // z-score of the training features
  double threshold;             // strict: probability > threshold is positive
  RocCurve val_roc;
  double val_f1;

  double probability(std::span<const double> raw_features) const;
  bool classify(std::span<const double> raw_features) const;
};

// Fits the MLP on standardized frozen features and picks its threshold on
// validation at target_fpr, the same way the HDC threshold is chosen.
MlpBaseline mlp_baseline(std::span<const std::vector<double>> train_features, std::span<const hdc::Label> train_labels,
                         std::span<const std::vector<double>> val_features, std::span<const hdc::Label> val_labels,
                         const nn::MlpConfig& config, double target_fpr);

struct OnlineConfig {
  std::size_t feedback_period = 50;  // segments between oracle rounds
  std::size_t feedback_budget = 50;  // corrections the oracle may return per round
  std::size_t window = 100;          // rolling F1 window
  std::size_t buffer_capacity = 4;
};

struct FeedbackRound {
  std::size_t at = 0;         // stream index after which the round ran
  std::size_t inspected = 0;  // transmitted segments seen by the oracle
  std::size_t flagged = 0;    // misclassifications returned as feedback
  double f1_before = 0.0;     // window ending at `at`, decisions as made
  double f1_after = 0.0;      // same window rescored by the updated model
};

struct OnlineTrace {
  std::vector<double> scores;
  std::vector<bool> predictions;
  std::vector<FeedbackRound> rounds;
  hdc::ClassModel final_model;
};

// Streams the encoded segments through the selective pipeline. The oracle
// sees only transmitted segments (the detection and its buffered context),
// flags those the edge got wrong, and the edge applies online_update.
OnlineTrace online_learning_experiment(std::span<const hdc::Hypervector> stream, std::span<const hdc::Label> truth,
                                       const hdc::ClassModel& model, const OnlineConfig& config);

// F1 over [begin, end); NaN when tp + fp + fn == 0.
double window_f1(const std::vector<bool>& predictions, std::span<const hdc::Label> truth, std::size_t begin,
                 std::size_t end);
// Entry i is the F1 over the `window` segments ending at i (fewer at the start).
std::vector<double> rolling_f1(const std::vector<bool>& predictions, std::span<const hdc::Label> truth,
                               std::size_t window);

struct NamedPredictions {
  std::string name;
  std::vector<bool> predictions;
};

// index,truth,<name>_pred...,<name>_f1... with rolling F1 per series.
void write_online_csv(const std::filesystem::path& path, std::span<const hdc::Label> truth,
                      std::span<const NamedPredictions> series, std::size_t window,
                      const std::string& header_comment = {});

}  // namespace hisense::eval
