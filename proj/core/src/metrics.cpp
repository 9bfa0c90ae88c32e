#include "hisense/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "hisense/error.hpp"

namespace hisense::eval {

RocCurve roc_curve(std::span<const ScoredLabel> scores) {
  RocCurve curve;
  for (const auto& s : scores) {
    if (!std::isfinite(s.score)) throw InvalidArgument("roc_curve: non-finite score");
    (s.positive ? curve.positives : curve.negatives)++;
  }
  if (curve.positives == 0 || curve.negatives == 0) {
    throw InvalidArgument("roc_curve: need at least one positive and one negative sample");
  }
  std::vector<ScoredLabel> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredLabel& a, const ScoredLabel& b) { return a.score > b.score; });

  const auto P = static_cast<double>(curve.positives);
  const auto N = static_cast<double>(curve.negatives);
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    const double t = sorted[i].score;
    for (; i < sorted.size() && sorted[i].score == t; ++i) (sorted[i].positive ? tp : fp)++;
    curve.points.push_back({t, static_cast<double>(fp) / N, static_cast<double>(tp) / P});
  }
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    curve.auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  return curve;
}

ThresholdChoice choose_threshold(const RocCurve& curve, double target_fpr) {
  if (curve.points.empty()) throw InvalidArgument("choose_threshold: empty curve");
  if (!(target_fpr >= 0.0 && target_fpr <= 1.0)) {
    throw InvalidArgument("choose_threshold: target_fpr must be in [0, 1]");
  }
  const RocPoint* best = &curve.points.front();
  for (const auto& p : curve.points) {
    if (p.fpr <= target_fpr && p.tpr > best->tpr) best = &p;
  }
  return {best->threshold, best->fpr, best->tpr};
}

double strict_threshold(double roc_threshold) {
  if (roc_threshold > 1.0) return 1.0;
  return std::clamp(std::nextafter(roc_threshold, -std::numeric_limits<double>::infinity()), -1.0, 1.0);
}

double ConfusionCounts::tpr() const {
  return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double ConfusionCounts::fpr() const {
  return fp + tn == 0 ? 0.0 : static_cast<double>(fp) / static_cast<double>(fp + tn);
}

ConfusionCounts confusion(std::span<const bool> predicted, std::span<const bool> truth) {
  if (predicted.size() != truth.size()) {
    throw InvalidArgument("confusion: prediction and truth lengths differ");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i]) {
      (truth[i] ? c.tp : c.fp)++;
    } else {
      (truth[i] ? c.fn : c.tn)++;
    }
  }
  return c;
}

double f1_score(const ConfusionCounts& c) {
  const std::size_t denom = 2 * c.tp + c.fp + c.fn;
  if (denom == 0) throw InvalidArgument("f1_score: undefined when tp + fp + fn == 0");
  return 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
}

void write_roc_csv(const std::filesystem::path& path, const RocCurve& curve,
                   const std::string& header_comment) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  out << "# auc=" << curve.auc << '\n';
  out << "threshold,fpr,tpr\n";
  for (const auto& p : curve.points) {
    if (std::isinf(p.threshold)) {
      out << "inf";
    } else {
      out << p.threshold;
    }
    out << ',' << p.fpr << ',' << p.tpr << '\n';
  }
}

}  // namespace hisense::eval
