#pragma once

// Hyperdimensional computing core: real-valued hypervectors, the three
// algebraic operations (bundle, bind, permute), cosine similarity, the
// cosine/sine random-projection encoder, and the two-class model used at the
// sensor edge.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

namespace hisense::hdc {

class Hypervector {
 public:
  Hypervector() = default;
  // All-zero vector of dimensionality `dim`.
  explicit Hypervector(std::size_t dim);
  // Throws InvalidArgument on an empty vector or a non-finite component.
  explicit Hypervector(std::vector<double> components);

  static Hypervector zeros(std::size_t dim) { return Hypervector(dim); }
  static Hypervector ones(std::size_t dim);

  std::size_t dim() const noexcept { return data_.size(); }
  std::span<const double> components() const noexcept { return data_; }
  double operator[](std::size_t i) const { return data_[i]; }

  double norm() const;

  friend bool operator==(const Hypervector&, const Hypervector&) = default;

 private:
  std::vector<double> data_;
};

// Element-wise addition (memorization).
Hypervector bundle(const Hypervector& a, const Hypervector& b);
// Sum of a non-empty list, accumulated left to right.
Hypervector bundle_all(std::span<const Hypervector> items);
// Element-wise multiplication (association).
Hypervector bind(const Hypervector& a, const Hypervector& b);
// Cyclic rotation: result[i] = h[(i - k) mod D].
Hypervector permute(const Hypervector& h, std::size_t k);
Hypervector negate(const Hypervector& h);
Hypervector scale(const Hypervector& h, double factor);
// a + factor * b
Hypervector axpy(const Hypervector& a, double factor, const Hypervector& b);

double dot(const Hypervector& a, const Hypervector& b);
// Cosine similarity in [-1, 1]. Throws DimensionMismatch or ZeroNormError.
double similarity(const Hypervector& a, const Hypervector& b);

// Random +1/-1 vector, used to exercise the similarity-preservation property
// of binding.
Hypervector random_bipolar(std::size_t dim, std::uint64_t seed);
Hypervector random_gaussian(std::size_t dim, std::uint64_t seed);

// Random projection parameters for the nonlinear encoder. The projection is
// stored one row per output component (row i is the vector f_i of length
// feature_dim), so each output component reads contiguous memory.
class EncoderParams {
 public:
  static EncoderParams generate(std::size_t feature_dim, std::size_t dim, std::uint64_t seed);

  std::size_t feature_dim() const noexcept { return feature_dim_; }
  std::size_t dim() const noexcept { return dim_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::span<const double> projection_row(std::size_t i) const {
    return std::span<const double>(projection_).subspan(i * feature_dim_, feature_dim_);
  }
  std::span<const double> projection() const noexcept { return projection_; }
  std::span<const double> phases() const noexcept { return phases_; }

  friend bool operator==(const EncoderParams&, const EncoderParams&) = default;

 private:
  EncoderParams() = default;

  std::size_t feature_dim_ = 0;
  std::size_t dim_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<double> projection_;
  std::vector<double> phases_;
};

// h_i = cos(<f_i, x> + b_i) * sin(<f_i, x>)
Hypervector encode(std::span<const double> x, const EncoderParams& enc);

enum class Label : std::uint8_t { kNegative = 0, kPositive = 1 };

struct Example {
  Hypervector hv;
  Label label;
};

// Deployed score: similarity to the positive class only, or the opt-in
// margin sim(h, c_pos) - sim(h, c_neg).
enum class ScoreMode : std::uint8_t { kPositiveSimilarity = 0, kMargin = 1 };

class ClassModel {
 public:
  static constexpr double kDefaultAlpha = 0.05;

  ClassModel(Hypervector c_pos, Hypervector c_neg, double alpha = kDefaultAlpha,
             double t_score = 0.0, ScoreMode mode = ScoreMode::kPositiveSimilarity);

  const Hypervector& c_pos() const noexcept { return c_pos_; }
  const Hypervector& c_neg() const noexcept { return c_neg_; }
  std::size_t dim() const noexcept { return c_pos_.dim(); }
  double alpha() const noexcept { return alpha_; }
  double t_score() const noexcept { return t_score_; }
  ScoreMode mode() const noexcept { return mode_; }

  ClassModel with_threshold(double t_score) const;
  ClassModel with_alpha(double alpha) const;
  ClassModel with_mode(ScoreMode mode) const;
  ClassModel with_classes(Hypervector c_pos, Hypervector c_neg) const;

  friend bool operator==(const ClassModel&, const ClassModel&) = default;

 private:
  Hypervector c_pos_;
  Hypervector c_neg_;
  double alpha_;
  double t_score_;
  ScoreMode mode_;
};

// Bundles each class. Throws InvalidArgument if either class is empty.
ClassModel train_initial(std::span<const Example> samples,
                         double alpha = ClassModel::kDefaultAlpha, double t_score = 0.0);

double score(const ClassModel& model, const Hypervector& h);
// score > t_score; ties classify negative.
bool classify(const ClassModel& model, const Hypervector& h);

struct RetrainResult {
  ClassModel model;
  std::size_t errors;
};

// One sequential pass of the mispredict-only update: for a sample of true
// class l predicted as p != l, C_l += alpha*h and C_p -= alpha*h.
RetrainResult retrain_epoch(const ClassModel& model, std::span<const Example> samples);

// Applies the retraining rule to cloud feedback. Items the current model
// already classifies correctly are skipped.
ClassModel online_update(const ClassModel& model, std::span<const Example> feedback);

// Serving slot: readers take a snapshot, writers replace the whole model.
class ModelSlot {
 public:
  explicit ModelSlot(ClassModel model);

  std::shared_ptr<const ClassModel> load() const;
  void store(ClassModel model);

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const ClassModel> current_;
};

// Container "HSHD": dimensionality, encoder seed and feature_dim (the
// projection is regenerated), class vectors, alpha, threshold, score mode,
// and an opaque provenance string.
void save_model(const std::filesystem::path& path, const ClassModel& model,
                const EncoderParams& encoder, const std::string& provenance = {});
struct LoadedModel {
  ClassModel model;
  EncoderParams encoder;
};
LoadedModel load_model(const std::filesystem::path& path);

}  // namespace hisense::hdc
