#pragma once

// UrbanSound8K-layout ingestion, fold splits, minority oversampling, and the
// synthetic substitute dataset used when the real corpus is absent.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hisense/audio.hpp"
#include "hisense/error.hpp"
#include "hisense/random.hpp"

namespace hisense::data {

using audio::AudioSegment;
using hdc::Label;

inline constexpr const char* kDefaultPositiveClass = "gun_shot";
inline constexpr const char* kMetadataFile = "metadata/UrbanSound8K.csv";

struct ManifestEntry {
  std::filesystem::path path;
  int fold = 0;
  int class_id = 0;
  std::string class_name;
  bool aoi = false;

  Label label() const { return aoi ? Label::kPositive : Label::kNegative; }
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::string positive_class = kDefaultPositiveClass;
  // One message per skipped row, naming its line number.
  std::vector<std::string> warnings;
};

// Reads the metadata CSV (columns slice_file_name, fold, classID, class; any
// order, extra columns ignored). Audio paths resolve to
// audio_root/fold<k>/<slice_file_name>. Rows that fail to parse or whose file
// is missing are skipped with a warning.
DatasetManifest load_manifest(const std::filesystem::path& csv_path, const std::filesystem::path& audio_root,
                              const std::string& positive_class = kDefaultPositiveClass);

struct SplitPlan {
  std::set<int> train_folds{1, 2, 3, 4, 5, 6, 7, 8};
  std::set<int> val_folds{9};
  std::set<int> test_folds{10};
  double oversample_to_ratio = 0.5;

  // Throws DatasetError(kBadSplit) unless the fold sets are nonempty,
  // pairwise disjoint and within 1..10, and the ratio is in [0, 1).
  void validate() const;
};

struct Split {
  std::vector<ManifestEntry> train;
  std::vector<ManifestEntry> val;
  std::vector<ManifestEntry> test;
};

// Partitions by fold; entries in no listed fold are dropped. Oversampling is
// left to the caller so that it is applied to the training part only.
Split split(const DatasetManifest& manifest, const SplitPlan& plan);

// Indices into the original list: every original index once, in order,
// followed by positives drawn uniformly with replacement until the positive
// fraction reaches target_ratio. Throws DatasetError(kNoPositives) when there
// are no positives and InvalidArgument unless target_ratio is in [0, 1).
std::vector<std::size_t> oversample_indices(const std::vector<bool>& positive, double target_ratio,
                                            std::uint64_t seed);

template <typename T, typename IsPositive>
std::vector<T> oversample(std::span<const T> items, IsPositive is_positive, double target_ratio,
                          std::uint64_t seed) {
  std::vector<bool> flags;
  flags.reserve(items.size());
  for (const auto& item : items) flags.push_back(is_positive(item));
  std::vector<T> out;
  for (std::size_t i : oversample_indices(flags, target_ratio, seed)) out.push_back(items[i]);
  return out;
}

inline std::vector<ManifestEntry> oversample(std::span<const ManifestEntry> entries, double target_ratio,
                                             std::uint64_t seed) {
  return oversample(entries, [](const ManifestEntry& e) { return e.aoi; }, target_ratio, seed);
}

// Loads each entry's WAV, resamples to sample_rate and cuts the first
// `seconds` (zero padded) into a labeled segment.
std::vector<AudioSegment> load_segments(std::span<const ManifestEntry> entries, int sample_rate, double seconds);

// Synthetic sound scenes. Negatives are colored noise with optional harmonic
// tonal distractors; positives add a short impulse-train burst with
// exponential decay, band-limited around a spectral centroid. In drift mode
// the centroid moves from centroid_hz to drift_centroid_hz at drift_index.
struct SynthConfig {
  int sample_rate = 8000;
  double seconds = 1.0;
  double centroid_hz = 2400.0;
  double drift_centroid_hz = 500.0;
  std::optional<std::size_t> drift_index;
  double burst_amplitude_min = 0.25;
  double burst_amplitude_max = 0.7;
  double tonal_probability = 0.5;
};

struct SynthItem {
  AudioSegment segment;
  std::string class_name;
  int class_id;
};

// round(n * p_aoi) positives at positions drawn from the seed.
std::vector<Label> synth_labels(std::size_t n, double p_aoi, std::uint64_t seed);

// The segment at stream position `index`; depends only on (seed, index,
// label, config), so streams can be generated lazily.
SynthItem synth_item(std::size_t index, Label label, std::uint64_t seed, const SynthConfig& config);

std::vector<AudioSegment> synth_dataset(std::size_t n, double p_aoi, std::uint64_t seed,
                                        const SynthConfig& config = {});

// Writes audio/fold<k>/synth-<i>.wav (fold = 1 + i mod 10) and the metadata
// CSV under `root`. Returns the manifest path.
std::filesystem::path write_synthetic_dataset(const std::filesystem::path& root, std::size_t n, double p_aoi,
                                              std::uint64_t seed, const SynthConfig& config = {});

}  // namespace hisense::data
