#pragma once

// Run configuration for the hisense tool. A JSON file supplies any subset of
// the fields below; missing fields take the defaults, and command-line flags
// are applied on top.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hisense/energy.hpp"
#include "hisense/hdc.hpp"
#include "hisense/near_sensor_model.hpp"

namespace hisense::cli {

struct PathsConfig {
  std::filesystem::path dataset_root = "data/synthetic";
  std::filesystem::path output_dir = "out";
};

struct DatasetConfig {
  std::string mode = "synthetic";  // "synthetic" or "real"
  std::size_t n = 1000;
  double p_aoi = 0.1;
  std::uint64_t seed = 1;
  std::string positive_class = "gun_shot";
  std::vector<int> train_folds{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<int> val_folds{9};
  std::vector<int> test_folds{10};
  double oversample_ratio = 0.5;
  std::uint64_t oversample_seed = 5;
};

struct HdcConfig {
  std::size_t dim = 10000;
  double alpha = hdc::ClassModel::kDefaultAlpha;
  std::uint64_t seed = 42;
  double encoder_gain = 1.0;
  int retrain_epochs = 10;
  hdc::ScoreMode score_mode = hdc::ScoreMode::kPositiveSimilarity;
};

struct ConvConfig {
  int layers = 5;
  std::vector<int> channels;  // empty: default schedule for `layers`
  std::uint64_t seed = 1;
  int epochs = 30;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t batch_size = 32;
  std::uint64_t shuffle_seed = 7;
};

struct PipelineSection {
  std::size_t buffer_capacity = 4;
  // Exactly one is set after loading.
  std::optional<double> t_score;
  std::optional<double> target_fpr = 0.05;
  bool dedupe = true;
  bool flush_on_transmit = false;
};

struct StreamConfig {
  std::size_t n = 4000;
  double p_aoi = 0.01;
  std::uint64_t seed = 77;
};

struct SweepConfig {
  std::size_t thresholds = 21;
  double t_min = -1.0;
  double t_max = 1.0;
  std::vector<int> layer_counts{1, 2, 3, 4, 5};
  std::vector<double> p_grid{0.001, 0.01, 0.05, 0.1, 0.2};
};

struct OnlineSection {
  std::size_t n = 1000;
  double p_aoi = 0.2;
  std::uint64_t seed = 99;
  std::size_t drift_index = 500;
  double centroid_hz = 2400.0;
  double drift_centroid_hz = 500.0;
  std::size_t feedback_period = 50;
  std::size_t feedback_budget = 50;
  std::size_t window = 100;
  double alpha = 0.05;
  hdc::ScoreMode score_mode = hdc::ScoreMode::kMargin;
  std::size_t mlp_hidden = 32;
  int mlp_epochs = 200;
};

struct QuantizeConfig {
  std::size_t calibration_samples = 128;
};

struct RunConfig {
  PathsConfig paths;
  DatasetConfig dataset;
  model::FrontendConfig frontend = model::FrontendConfig::desk();
  ConvConfig convnet;
  HdcConfig hdc;
  PipelineSection pipeline;
  energy::EnergyParams energy;
  StreamConfig stream;
  SweepConfig sweep;
  OnlineSection online;
  QuantizeConfig quantize;

  model::TrainConfig train_config() const;
  // Throws InvalidArgument on an inconsistent configuration.
  void validate() const;
};

// Parses JSON text. Unknown keys are rejected so typos do not pass silently.
// Setting pipeline.t_score drops the default target_fpr; setting both is an
// error.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

// Canonical JSON of every field except paths, which locate data rather than
// define the experiment.
std::string canonical_json(const RunConfig& config);
// FNV-1a of canonical_json, as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace hisense::cli
