#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "hisense/audio.hpp"
#include "hisense/error.hpp"
#include "hisense/random.hpp"
#include "oracles.hpp"

namespace audio = hisense::audio;

TEST(Fft, MatchesNaiveDftSmall) {
  hisense::Rng rng(3);
  for (std::size_t n : {1u, 2u, 4u, 16u, 64u}) {
    std::vector<std::complex<double>> x(n);
    for (auto& v : x) v = {rng.normal(), rng.normal()};
    const auto ref = oracle::naive_dft(x);
    audio::fft_inplace(x);
    for (std::size_t k = 0; k < n; ++k) EXPECT_LT(std::abs(x[k] - ref[k]), 1e-9) << "n=" << n << " k=" << k;
  }
}

TEST(Fft, RejectsNonPowerOfTwo) {
  std::vector<std::complex<double>> x(6);
  EXPECT_THROW(audio::fft_inplace(x), hisense::InvalidArgument);
  EXPECT_TRUE(audio::is_power_of_two(1024));
  EXPECT_FALSE(audio::is_power_of_two(0));
  EXPECT_FALSE(audio::is_power_of_two(96));
}

TEST(Fft, PureToneLandsInItsBin) {
  const std::size_t n = 256;
  std::vector<double> frame(n);
  for (std::size_t t = 0; t < n; ++t) frame[t] = std::cos(2.0 * std::numbers::pi * 10.0 * t / n);
  const auto mag = audio::dft_magnitude(frame);
  ASSERT_EQ(mag.size(), n / 2 + 1);
  EXPECT_NEAR(mag[10], n / 2.0, 1e-9);
  for (std::size_t k = 0; k < mag.size(); ++k) {
    if (k != 10) EXPECT_LT(mag[k], 1e-9);
  }
}

TEST(HannWindow, PeriodicDefinition) {
  const auto w = audio::hann_window(8);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_NEAR(w[i], 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / 8.0), 1e-15);
  }
}

TEST(AudioSegment, PadsTruncatesClipsAndRejects) {
  const audio::AudioSegment pad({0.5, -0.5}, 4, 1.0);
  EXPECT_EQ(pad.samples().size(), 4u);
  EXPECT_EQ(pad.valid_length(), 2u);
  EXPECT_EQ(pad.samples()[3], 0.0);
  const audio::AudioSegment cut({0.1, 0.2, 0.3, 0.4, 0.5, 0.6}, 4, 1.0);
  EXPECT_EQ(cut.samples().size(), 4u);
  const audio::AudioSegment clip({2.0, -3.0}, 2, 1.0);
  EXPECT_EQ(clip.samples()[0], 1.0);
  EXPECT_EQ(clip.samples()[1], -1.0);
  EXPECT_THROW(audio::AudioSegment({NAN}, 2, 1.0), hisense::InvalidArgument);
}

TEST(Segmenter, NonOverlappingWithPaddedTail) {
  std::vector<double> x(10, 0.1);
  const auto segs = audio::segment(x, 4, 1.0);
  ASSERT_EQ(segs.size(), 3u);
  EXPECT_EQ(segs[2].valid_length(), 2u);
  EXPECT_TRUE(audio::segment(std::vector<double>{}, 4, 1.0).empty());
}

TEST(Stft, ShapeAndNormalization) {
  hisense::Rng rng(1);
  std::vector<double> x(8000);
  for (double& v : x) v = rng.uniform(-0.5, 0.5);
  const audio::AudioSegment seg(x, 8000, 1.0);
  const auto s = audio::stft_spectrogram(seg, {128, 128});
  EXPECT_EQ(s.frames(), 62u);
  EXPECT_EQ(s.bins(), 65u);
  double mean = 0.0;
  for (double v : s.values()) mean += v;
  mean /= static_cast<double>(s.values().size());
  double var = 0.0;
  for (double v : s.values()) var += (v - mean) * (v - mean);
  var /= static_cast<double>(s.values().size());
  EXPECT_NEAR(mean, 0.0, 1e-9);
  EXPECT_NEAR(var, 1.0, 1e-9);
}

TEST(Stft, SilenceMapsToZeros) {
  const audio::AudioSegment seg(std::vector<double>(1024, 0.0), 1024, 1.0);
  const auto s = audio::stft_spectrogram(seg, {256, 128});
  for (double v : s.values()) EXPECT_EQ(v, 0.0);
}

TEST(Stft, FrameMatchesLogMagnitudeBeforeNormalization) {
  // Two frames of different tones; the ordering of bins must follow the
  // oracle's log-magnitude ordering since normalization is affine.
  const std::size_t n = 64;
  std::vector<double> x(2 * n);
  for (std::size_t t = 0; t < 2 * n; ++t) x[t] = 0.5 * std::sin(2.0 * std::numbers::pi * 5.0 * t / n);
  const audio::AudioSegment seg(x, static_cast<int>(2 * n), 1.0);
  const auto s = audio::stft_spectrogram(seg, {n, n});
  ASSERT_EQ(s.frames(), 2u);
  const auto w = audio::hann_window(n);
  std::vector<std::complex<double>> frame(n);
  for (std::size_t t = 0; t < n; ++t) frame[t] = x[t] * w[t];
  const auto ref = oracle::naive_dft(frame);
  for (std::size_t a = 0; a <= n / 2; ++a) {
    for (std::size_t b = 0; b <= n / 2; ++b) {
      const double ra = std::log1p(std::abs(ref[a]));
      const double rb = std::log1p(std::abs(ref[b]));
      if (ra > rb + 1e-9) EXPECT_GT(s.at(0, a), s.at(0, b));
    }
  }
}

TEST(Stft, TooShortSegmentIsRejected) {
  const audio::AudioSegment seg(std::vector<double>(100, 0.1), 100, 1.0);
  EXPECT_THROW(audio::stft_spectrogram(seg, {128, 64}), hisense::ShapeError);
  EXPECT_THROW(audio::stft_spectrogram(seg, {96, 48}), hisense::InvalidArgument);
}

TEST(Wav, Pcm16RoundTripAndErrors) {
  const auto dir = std::filesystem::temp_directory_path() / "hisense_test_wav";
  std::filesystem::create_directories(dir);
  std::vector<double> x{0.0, 0.5, -0.5, 0.25, -1.0};
  audio::write_wav_pcm16(dir / "a.wav", x, 8000);
  const auto w = audio::load_wav(dir / "a.wav");
  EXPECT_EQ(w.sample_rate, 8000);
  ASSERT_EQ(w.samples.size(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(w.samples[i], x[i], 1.0 / 32767.0);

  EXPECT_THROW(audio::load_wav(dir / "missing.wav"), hisense::WavError);
  {
    std::ofstream f(dir / "bad.wav", std::ios::binary);
    f << "RIFF\x04\0\0\0WAVX";
  }
  EXPECT_THROW(audio::load_wav(dir / "bad.wav"), hisense::WavError);
  std::filesystem::remove_all(dir);
}

TEST(Resample, LinearInterpolationEndpoints) {
  const std::vector<double> x{0.0, 1.0, 0.0, -1.0};
  EXPECT_EQ(audio::resample_linear(x, 4, 4), x);
  const auto up = audio::resample_linear(x, 4, 8);
  ASSERT_EQ(up.size(), 8u);
  EXPECT_DOUBLE_EQ(up[0], 0.0);
  EXPECT_DOUBLE_EQ(up[1], 0.5);
  EXPECT_DOUBLE_EQ(up[2], 1.0);
}
