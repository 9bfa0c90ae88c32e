#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hisense/hdc.hpp"

namespace hisense::audio {

using hdc::Label;

struct WavData {
  std::vector<double> samples;  // mono, in [-1, 1]
  int sample_rate = 0;
};

// Reads PCM16 or float32 RIFF/WAVE (WAVE_FORMAT_EXTENSIBLE accepted when its
// subformat is one of those). Multi-channel input is averaged to mono and
// PCM16 is scaled by 1/32768. Throws WavError.
WavData load_wav(const std::filesystem::path& path);

// Writes mono PCM16; samples are clipped to [-1, 1] and scaled by 32768
// (saturating at 32767) so load_wav reproduces them to within 1/32768.
void write_wav_pcm16(const std::filesystem::path& path, std::span<const double> samples,
                     int sample_rate);

// Linear interpolation; output length round(n * to / from).
std::vector<double> resample_linear(std::span<const double> samples, int from_rate, int to_rate);

// Fixed-length clip. The constructor pads with zeros or truncates to
// round(sample_rate * seconds) samples; values outside [-1, 1] are clipped and
// non-finite values are rejected.
class AudioSegment {
 public:
  AudioSegment(std::vector<double> samples, int sample_rate, double seconds,
               std::optional<Label> label = std::nullopt, std::string source_id = {});

  std::span<const double> samples() const noexcept { return samples_; }
  int sample_rate() const noexcept { return sample_rate_; }
  const std::optional<Label>& label() const noexcept { return label_; }
  const std::string& source_id() const noexcept { return source_id_; }
  // Number of leading samples that came from the source (the rest is padding).
  std::size_t valid_length() const noexcept { return valid_length_; }

  AudioSegment with_label(std::optional<Label> label) const;

 private:
  std::vector<double> samples_;
  int sample_rate_;
  std::optional<Label> label_;
  std::string source_id_;
  std::size_t valid_length_;
};

// Consecutive non-overlapping windows; the final partial window is zero
// padded. Empty input yields no segments.
std::vector<AudioSegment> segment(std::span<const double> samples, int sample_rate,
                                  double segment_seconds, const std::string& source_prefix = "seg");

bool is_power_of_two(std::size_t n);

// In-place iterative radix-2 Cooley-Tukey transform (forward, unscaled).
void fft_inplace(std::vector<std::complex<double>>& data);

// One-sided magnitude spectrum, length N/2 + 1.
std::vector<double> dft_magnitude(std::span<const double> frame);

// Periodic Hann window of length n.
std::vector<double> hann_window(std::size_t n);

class Spectrogram {
 public:
  Spectrogram(std::size_t frames, std::size_t bins, std::vector<double> values,
              std::size_t frame_size, std::size_t hop, bool normalized);

  std::size_t frames() const noexcept { return frames_; }
  std::size_t bins() const noexcept { return bins_; }
  std::size_t frame_size() const noexcept { return frame_size_; }
  std::size_t hop() const noexcept { return hop_; }
  bool normalized() const noexcept { return normalized_; }
  // Row-major frames x bins.
  std::span<const double> values() const noexcept { return values_; }
  double at(std::size_t t, std::size_t f) const { return values_[t * bins_ + f]; }

  friend bool operator==(const Spectrogram&, const Spectrogram&) = default;

 private:
  std::size_t frames_;
  std::size_t bins_;
  std::size_t frame_size_;
  std::size_t hop_;
  bool normalized_;
  std::vector<double> values_;
};

struct StftParams {
  std::size_t frame_size = 1024;
  std::size_t hop = 512;

  friend bool operator==(const StftParams&, const StftParams&) = default;
};

// Hann-windowed magnitude frames, ln(1 + v) compression, then zero-mean /
// unit-variance over the whole matrix (a constant matrix maps to zeros).
Spectrogram stft_spectrogram(const AudioSegment& seg, const StftParams& params);

// frames x bins CSV, one frame per row.
void write_spectrogram_csv(const std::filesystem::path& path, const Spectrogram& s);

}  // namespace hisense::audio
