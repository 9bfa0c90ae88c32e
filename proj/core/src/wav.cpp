#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "hisense/audio.hpp"
#include "hisense/error.hpp"

namespace hisense::audio {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

[[noreturn]] void malformed(const std::filesystem::path& path, const std::string& why) {
  throw WavError(WavError::Kind::kMalformedHeader, path.string() + ": " + why);
}

}  // namespace

WavData load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WavError(WavError::Kind::kMissingFile, "cannot open WAV file: " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    malformed(path, "not a RIFF/WAVE file");
  }

  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t bits = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      // Tolerate a truncated trailing data chunk, which some writers produce.
      if (std::memcmp(chunk, "data", 4) != 0) malformed(path, "chunk overruns file");
    }
    const std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) malformed(path, "fmt chunk too short");
      format = le16(chunk + 8);
      channels = le16(chunk + 10);
      rate = le32(chunk + 12);
      bits = le16(chunk + 22);
      if (format == kFormatExtensible) {
        if (avail < 40) malformed(path, "extensible fmt chunk too short");
        format = le16(chunk + 8 + 24);
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = avail;
    }
    pos = body + size + (size & 1u);
  }
  if (channels == 0 || rate == 0) malformed(path, "missing or invalid fmt chunk");
  if (data == nullptr) malformed(path, "missing data chunk");

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool f32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !f32) {
    throw WavError(WavError::Kind::kUnsupportedCodec,
                   path.string() + ": unsupported codec (format " + std::to_string(format) +
                       ", " + std::to_string(bits) + " bits)");
  }

  const std::size_t width = bits / 8;
  const std::size_t frames = data_size / (width * channels);
  WavData out;
  out.sample_rate = static_cast<int>(rate);
  out.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const std::uint8_t* p = data + (i * channels + c) * width;
      if (pcm16) {
        acc += static_cast<std::int16_t>(le16(p)) / 32768.0;
      } else {
        const float v = std::bit_cast<float>(le32(p));
        acc += std::isfinite(v) ? std::clamp(static_cast<double>(v), -1.0, 1.0) : 0.0;
      }
    }
    out.samples[i] = acc / channels;
  }
  return out;
}

void write_wav_pcm16(const std::filesystem::path& path, std::span<const double> samples,
                     int sample_rate) {
  if (sample_rate <= 0) throw InvalidArgument("write_wav_pcm16: sample rate must be positive");
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(out, 16);
  put16(out, kFormatPcm);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(sample_rate));
  put32(out, static_cast<std::uint32_t>(sample_rate) * 2);
  put16(out, 2);
  put16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put32(out, data_bytes);
  for (double s : samples) {
    const double v = std::isfinite(s) ? std::clamp(s, -1.0, 1.0) : 0.0;
    const long q = std::clamp(std::lround(v * 32768.0), -32768L, 32767L);
    put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw WavError(WavError::Kind::kWriteFailed, "cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw WavError(WavError::Kind::kWriteFailed, "write failed: " + path.string());
}

}  // namespace hisense::audio
