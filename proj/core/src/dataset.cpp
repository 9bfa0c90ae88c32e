#include "hisense/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

namespace hisense::data {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::optional<int> parse_int(const std::string& s) {
  int value = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

}  // namespace

DatasetManifest load_manifest(const std::filesystem::path& csv_path, const std::filesystem::path& audio_root,
                              const std::string& positive_class) {
  std::ifstream in(csv_path);
  if (!in) throw DatasetError(DatasetError::Kind::kUnreadableFile, "cannot read manifest " + csv_path.string());

  DatasetManifest manifest;
  manifest.positive_class = positive_class;

  std::string line;
  if (!std::getline(in, line)) {
    throw DatasetError(DatasetError::Kind::kEmptyManifest, "manifest " + csv_path.string() + " is empty");
  }
  const auto header = split_csv_line(line);
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) column[header[i]] = i;
  std::string missing;
  for (const char* name : {"slice_file_name", "fold", "classID", "class"}) {
    if (!column.contains(name)) missing += std::string(missing.empty() ? "" : ", ") + name;
  }
  if (!missing.empty()) {
    throw DatasetError(DatasetError::Kind::kMissingColumns,
                       "manifest " + csv_path.string() + " lacks columns: " + missing);
  }
  const std::size_t c_file = column["slice_file_name"];
  const std::size_t c_fold = column["fold"];
  const std::size_t c_id = column["classID"];
  const std::size_t c_class = column["class"];
  const std::size_t needed = std::max({c_file, c_fold, c_id, c_class}) + 1;

  for (std::size_t line_no = 2; std::getline(in, line); ++line_no) {
    if (line.empty() || line == "\r") continue;
    const auto warn = [&](const std::string& why) {
      manifest.warnings.push_back("line " + std::to_string(line_no) + ": " + why);
    };
    const auto fields = split_csv_line(line);
    if (fields.size() < needed) {
      warn("expected at least " + std::to_string(needed) + " fields, found " + std::to_string(fields.size()));
      continue;
    }
    const auto fold = parse_int(fields[c_fold]);
    const auto class_id = parse_int(fields[c_id]);
    if (!fold || *fold < 1 || *fold > 10) {
      warn("fold '" + fields[c_fold] + "' is not in 1..10");
      continue;
    }
    if (!class_id) {
      warn("classID '" + fields[c_id] + "' is not an integer");
      continue;
    }
    if (fields[c_file].empty() || fields[c_class].empty()) {
      warn("empty file name or class");
      continue;
    }
    ManifestEntry entry;
    entry.path = audio_root / ("fold" + std::to_string(*fold)) / fields[c_file];
    if (!std::filesystem::is_regular_file(entry.path)) {
      warn("missing audio file " + entry.path.string());
      continue;
    }
    entry.fold = *fold;
    entry.class_id = *class_id;
    entry.class_name = fields[c_class];
    entry.aoi = entry.class_name == positive_class;
    manifest.entries.push_back(std::move(entry));
  }
  if (manifest.entries.empty()) {
    throw DatasetError(DatasetError::Kind::kEmptyManifest,
                       "manifest " + csv_path.string() + " has no usable rows");
  }
  return manifest;
}

void SplitPlan::validate() const {
  const auto bad = [](const std::string& why) { throw DatasetError(DatasetError::Kind::kBadSplit, why); };
  if (train_folds.empty() || val_folds.empty() || test_folds.empty()) bad("split: every fold set must be nonempty");
  std::set<int> seen;
  for (const auto* folds : {&train_folds, &val_folds, &test_folds}) {
    for (int f : *folds) {
      if (f < 1 || f > 10) bad("split: fold " + std::to_string(f) + " outside 1..10");
      if (!seen.insert(f).second) bad("split: fold " + std::to_string(f) + " assigned twice");
    }
  }
  if (!(oversample_to_ratio >= 0.0 && oversample_to_ratio < 1.0)) bad("split: oversample ratio must be in [0, 1)");
}

Split split(const DatasetManifest& manifest, const SplitPlan& plan) {
  plan.validate();
  Split out;
  for (const auto& e : manifest.entries) {
    if (plan.train_folds.contains(e.fold)) {
      out.train.push_back(e);
    } else if (plan.val_folds.contains(e.fold)) {
      out.val.push_back(e);
    } else if (plan.test_folds.contains(e.fold)) {
      out.test.push_back(e);
    }
  }
  return out;
}

std::vector<std::size_t> oversample_indices(const std::vector<bool>& positive, double target_ratio,
                                            std::uint64_t seed) {
  if (!(target_ratio >= 0.0 && target_ratio < 1.0)) {
    throw InvalidArgument("oversample: target_ratio must be in [0, 1)");
  }
  std::vector<std::size_t> pos;
  for (std::size_t i = 0; i < positive.size(); ++i) {
    if (positive[i]) pos.push_back(i);
  }
  if (pos.empty()) throw DatasetError(DatasetError::Kind::kNoPositives, "oversample: no positive entries");

  std::vector<std::size_t> out(positive.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
  const auto negatives = static_cast<double>(positive.size() - pos.size());
  // Smallest positive count P' with P' / (P' + N) >= r.
  const auto wanted = static_cast<std::size_t>(std::ceil(target_ratio * negatives / (1.0 - target_ratio) - 1e-9));
  Rng rng(seed);
  for (std::size_t have = pos.size(); have < wanted; ++have) out.push_back(pos[rng.index(pos.size())]);
  return out;
}

std::vector<AudioSegment> load_segments(std::span<const ManifestEntry> entries, int sample_rate, double seconds) {
  std::vector<AudioSegment> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    const auto wav = audio::load_wav(e.path);
    auto samples = audio::resample_linear(wav.samples, wav.sample_rate, sample_rate);
    out.emplace_back(std::move(samples), sample_rate, seconds, e.label(), e.path.filename().string());
  }
  return out;
}

}  // namespace hisense::data
