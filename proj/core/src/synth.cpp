#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include "hisense/dataset.hpp"

namespace hisense::data {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Two-pole band-pass (RBJ cookbook, 0 dB peak gain), applied in place.
void bandpass(std::vector<double>& x, double center_hz, double q, int sample_rate) {
  const double w0 = kTwoPi * center_hz / sample_rate;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  const double b0 = alpha / a0;
  const double b2 = -alpha / a0;
  const double a1 = -2.0 * std::cos(w0) / a0;
  const double a2 = (1.0 - alpha) / a0;
  double x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0;
  for (double& v : x) {
    const double y = b0 * v + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = v;
    y2 = y1;
    y1 = y;
    v = y;
  }
}

double rms(const std::vector<double>& x) {
  const double ss = std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
  return std::sqrt(ss / static_cast<double>(x.size()));
}

void colored_noise(std::vector<double>& out, Rng& rng) {
  const double pole = rng.uniform(0.0, 0.9);
  const double level = rng.uniform(0.03, 0.12);
  double y = 0.0;
  for (double& v : out) {
    y = pole * y + (1.0 - pole) * rng.normal();
    v = y;
  }
  const double r = rms(out);
  if (r > 0.0) {
    for (double& v : out) v *= level / r;
  }
}

void add_tonal(std::vector<double>& out, Rng& rng, int sample_rate) {
  const double f0 = rng.uniform(150.0, 900.0);
  const double amplitude = rng.uniform(0.05, 0.2);
  const double mod_hz = rng.uniform(0.5, 4.0);
  const double phase = rng.uniform(0.0, kTwoPi);
  const int harmonics = 1 + static_cast<int>(rng.index(3));
  for (std::size_t n = 0; n < out.size(); ++n) {
    const double t = static_cast<double>(n) / sample_rate;
    double v = 0.0;
    for (int k = 1; k <= harmonics; ++k) {
      if (k * f0 >= sample_rate / 2.0) break;
      v += std::sin(kTwoPi * k * f0 * t + k * phase) / k;
    }
    out[n] += amplitude * (0.75 + 0.25 * std::sin(kTwoPi * mod_hz * t)) * v;
  }
}

void add_burst(std::vector<double>& out, Rng& rng, const SynthConfig& cfg, double centroid_hz) {
  const int sr = cfg.sample_rate;
  std::vector<double> burst(out.size(), 0.0);
  const auto onset = static_cast<std::size_t>(rng.uniform(0.05, 0.55) * cfg.seconds * sr);
  const int impulses = 1 + static_cast<int>(rng.index(3));
  std::size_t start = onset;
  for (int k = 0; k < impulses && start < burst.size(); ++k) {
    const double tau = rng.uniform(0.008, 0.03) * sr;
    const double gain = k == 0 ? 1.0 : rng.uniform(0.4, 0.9);
    const auto length = static_cast<std::size_t>(6.0 * tau);
    for (std::size_t n = 0; n < length && start + n < burst.size(); ++n) {
      burst[start + n] += gain * rng.normal() * std::exp(-static_cast<double>(n) / tau);
    }
    start += static_cast<std::size_t>(rng.uniform(0.03, 0.1) * sr);
  }
  const double center = std::min(centroid_hz * rng.uniform(0.85, 1.15), 0.45 * sr);
  bandpass(burst, center, 1.2, sr);
  double peak = 0.0;
  for (double v : burst) peak = std::max(peak, std::abs(v));
  if (peak <= 0.0) return;
  const double amplitude = rng.uniform(cfg.burst_amplitude_min, cfg.burst_amplitude_max);
  for (std::size_t n = 0; n < out.size(); ++n) out[n] += burst[n] * amplitude / peak;
}

}  // namespace

std::vector<Label> synth_labels(std::size_t n, double p_aoi, std::uint64_t seed) {
  if (!(p_aoi >= 0.0 && p_aoi <= 1.0)) throw InvalidArgument("synth_labels: p_aoi must be in [0, 1]");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix_seed(seed, 0xAB));
  rng.shuffle(std::span<std::size_t>(order));
  const auto positives = static_cast<std::size_t>(std::llround(static_cast<double>(n) * p_aoi));
  std::vector<Label> labels(n, Label::kNegative);
  for (std::size_t i = 0; i < positives; ++i) labels[order[i]] = Label::kPositive;
  return labels;
}

SynthItem synth_item(std::size_t index, Label label, std::uint64_t seed, const SynthConfig& config) {
  if (config.sample_rate <= 0 || !(config.seconds > 0.0)) {
    throw InvalidArgument("synth_item: sample_rate and seconds must be positive");
  }
  const auto length = static_cast<std::size_t>(std::llround(config.sample_rate * config.seconds));
  std::vector<double> samples(length);
  Rng rng(mix_seed(seed, index));
  colored_noise(samples, rng);
  const bool tonal = rng.bernoulli(config.tonal_probability);
  if (tonal) add_tonal(samples, rng, config.sample_rate);

  std::string class_name = tonal ? "siren" : "air_conditioner";
  int class_id = tonal ? 8 : 0;
  if (label == Label::kPositive) {
    const bool drifted = config.drift_index && index >= *config.drift_index;
    add_burst(samples, rng, config, drifted ? config.drift_centroid_hz : config.centroid_hz);
    class_name = kDefaultPositiveClass;
    class_id = 6;
  }
  AudioSegment seg(std::move(samples), config.sample_rate, config.seconds, label,
                   "synth-" + std::to_string(index));
  return {std::move(seg), std::move(class_name), class_id};
}

std::vector<AudioSegment> synth_dataset(std::size_t n, double p_aoi, std::uint64_t seed, const SynthConfig& config) {
  const auto labels = synth_labels(n, p_aoi, seed);
  std::vector<AudioSegment> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(synth_item(i, labels[i], seed, config).segment);
  return out;
}

std::filesystem::path write_synthetic_dataset(const std::filesystem::path& root, std::size_t n, double p_aoi,
                                              std::uint64_t seed, const SynthConfig& config) {
  if (n == 0) throw InvalidArgument("write_synthetic_dataset: n must be at least 1");
  const auto labels = synth_labels(n, p_aoi, seed);
  const auto manifest = root / kMetadataFile;
  std::filesystem::create_directories(manifest.parent_path());
  std::ofstream csv(manifest);
  if (!csv) throw DatasetError(DatasetError::Kind::kUnreadableFile, "cannot write " + manifest.string());
  csv << "slice_file_name,fsID,start,end,salience,fold,classID,class\n";
  for (std::size_t i = 0; i < n; ++i) {
    const int fold = 1 + static_cast<int>(i % 10);
    const auto item = synth_item(i, labels[i], seed, config);
    const std::string name = item.segment.source_id() + ".wav";
    const auto dir = root / "audio" / ("fold" + std::to_string(fold));
    std::filesystem::create_directories(dir);
    audio::write_wav_pcm16(dir / name, item.segment.samples(), config.sample_rate);
    csv << name << ',' << i << ",0," << config.seconds << ",1," << fold << ',' << item.class_id << ','
        << item.class_name << '\n';
  }
  if (!csv) throw DatasetError(DatasetError::Kind::kUnreadableFile, "cannot write " + manifest.string());
  return manifest;
}

}  // namespace hisense::data
