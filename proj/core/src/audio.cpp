#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "hisense/audio.hpp"
#include "hisense/error.hpp"

namespace hisense::audio {

std::vector<double> resample_linear(std::span<const double> samples, int from_rate, int to_rate) {
  if (from_rate <= 0 || to_rate <= 0) {
    throw InvalidArgument("resample_linear: rates must be positive");
  }
  if (from_rate == to_rate || samples.empty()) return {samples.begin(), samples.end()};
  const double ratio = static_cast<double>(to_rate) / static_cast<double>(from_rate);
  const auto n_out = static_cast<std::size_t>(std::llround(static_cast<double>(samples.size()) * ratio));
  std::vector<double> out(n_out);
  const double step = static_cast<double>(from_rate) / static_cast<double>(to_rate);
  const std::size_t last = samples.size() - 1;
  for (std::size_t i = 0; i < n_out; ++i) {
    const double pos = static_cast<double>(i) * step;
    const auto left = std::min(static_cast<std::size_t>(pos), last);
    const std::size_t right = std::min(left + 1, last);
    const double frac = pos - static_cast<double>(left);
    out[i] = samples[left] + (samples[right] - samples[left]) * std::clamp(frac, 0.0, 1.0);
  }
  return out;
}

AudioSegment::AudioSegment(std::vector<double> samples, int sample_rate, double seconds,
                           std::optional<Label> label, std::string source_id)
    : samples_(std::move(samples)),
      sample_rate_(sample_rate),
      label_(label),
      source_id_(std::move(source_id)) {
  if (sample_rate <= 0) throw InvalidArgument("AudioSegment: sample rate must be positive");
  if (!(seconds > 0.0)) throw InvalidArgument("AudioSegment: duration must be positive");
  const auto length = static_cast<std::size_t>(std::llround(sample_rate * seconds));
  valid_length_ = std::min(length, samples_.size());
  samples_.resize(length, 0.0);
  for (auto& v : samples_) {
    if (!std::isfinite(v)) throw InvalidArgument("AudioSegment: non-finite sample in " + source_id_);
    v = std::clamp(v, -1.0, 1.0);
  }
}

AudioSegment AudioSegment::with_label(std::optional<Label> label) const {
  AudioSegment copy = *this;
  copy.label_ = label;
  return copy;
}

std::vector<AudioSegment> segment(std::span<const double> samples, int sample_rate,
                                  double segment_seconds, const std::string& source_prefix) {
  if (!(segment_seconds > 0.0)) throw InvalidArgument("segment: segment_seconds must be positive");
  if (sample_rate <= 0) throw InvalidArgument("segment: sample rate must be positive");
  std::vector<AudioSegment> out;
  if (samples.empty()) return out;
  const auto width = static_cast<std::size_t>(std::llround(sample_rate * segment_seconds));
  if (width == 0) throw InvalidArgument("segment: window shorter than one sample");
  const std::size_t count = (samples.size() + width - 1) / width;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t begin = k * width;
    const std::size_t end = std::min(begin + width, samples.size());
    out.emplace_back(std::vector<double>(samples.begin() + static_cast<std::ptrdiff_t>(begin),
                                         samples.begin() + static_cast<std::ptrdiff_t>(end)),
                     sample_rate, segment_seconds, std::nullopt,
                     source_prefix + "-" + std::to_string(k));
  }
  return out;
}

Spectrogram::Spectrogram(std::size_t frames, std::size_t bins, std::vector<double> values,
                         std::size_t frame_size, std::size_t hop, bool normalized)
    : frames_(frames),
      bins_(bins),
      frame_size_(frame_size),
      hop_(hop),
      normalized_(normalized),
      values_(std::move(values)) {
  if (values_.size() != frames_ * bins_) {
    throw ShapeError("Spectrogram: value count does not match frames x bins");
  }
}

Spectrogram stft_spectrogram(const AudioSegment& seg, const StftParams& params) {
  const std::size_t n = params.frame_size;
  if (!is_power_of_two(n)) throw InvalidArgument("stft: frame_size must be a power of two");
  if (params.hop == 0 || params.hop > n) throw InvalidArgument("stft: hop must be in [1, frame_size]");
  const auto samples = seg.samples();
  if (samples.size() < n) {
    throw ShapeError("stft: segment of " + std::to_string(samples.size()) +
                     " samples is shorter than one frame (" + std::to_string(n) + ")");
  }
  const std::size_t frames = (samples.size() - n) / params.hop + 1;
  const std::size_t bins = n / 2 + 1;
  const auto window = hann_window(n);

  std::vector<double> values(frames * bins);
  std::vector<std::complex<double>> buf(n);
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t start = t * params.hop;
    for (std::size_t i = 0; i < n; ++i) buf[i] = samples[start + i] * window[i];
    fft_inplace(buf);
    for (std::size_t k = 0; k < bins; ++k) values[t * bins + k] = std::log1p(std::abs(buf[k]));
  }

  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double stddev = std::sqrt(var / static_cast<double>(values.size()));
  if (stddev < 1e-12) {
    std::fill(values.begin(), values.end(), 0.0);
  } else {
    for (auto& v : values) v = (v - mean) / stddev;
  }
  return Spectrogram(frames, bins, std::move(values), n, params.hop, true);
}

void write_spectrogram_csv(const std::filesystem::path& path, const Spectrogram& s) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  for (std::size_t t = 0; t < s.frames(); ++t) {
    for (std::size_t f = 0; f < s.bins(); ++f) {
      if (f) out << ',';
      out << s.at(t, f);
    }
    out << '\n';
  }
}

}  // namespace hisense::audio
