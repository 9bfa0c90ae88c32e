#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hisense::eval {

struct ScoredLabel {
  double score;
  bool positive;
};

// A point of the ROC: predicting "positive" for every score >= threshold
// yields (fpr, tpr). The first point has threshold +inf.
struct RocPoint {
  double threshold;
  double fpr;
  double tpr;
};

struct RocCurve {
  std::vector<RocPoint> points;  // thresholds strictly decreasing
  double auc = 0.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

// Thresholds at every distinct score, swept in descending order; AUC by the
// trapezoidal rule. Throws InvalidArgument unless both classes are present.
RocCurve roc_curve(std::span<const ScoredLabel> scores);

struct ThresholdChoice {
  double threshold;  // ROC semantics: score >= threshold is positive
  double fpr;
  double tpr;
};

// Maximizes tpr subject to fpr <= target_fpr; among equal tpr the largest
// threshold wins.
ThresholdChoice choose_threshold(const RocCurve& curve, double target_fpr);

// Converts an ROC threshold (score >= t) into the classifier's strict
// convention (score > t_score), clamped to [-1, 1].
double strict_threshold(double roc_threshold);

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  double tpr() const;
  double fpr() const;

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

ConfusionCounts confusion(std::span<const bool> predicted, std::span<const bool> truth);

// 2tp / (2tp + fp + fn); throws InvalidArgument when tp + fp + fn == 0.
double f1_score(const ConfusionCounts& c);

// threshold,fpr,tpr rows preceded by a "# auc=..." comment line.
void write_roc_csv(const std::filesystem::path& path, const RocCurve& curve,
                   const std::string& header_comment = {});

}  // namespace hisense::eval
