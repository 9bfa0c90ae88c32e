#include <cmath>
#include <numbers>

#include "hisense/audio.hpp"
#include "hisense/error.hpp"

namespace hisense::audio {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_inplace(std::vector<std::complex<double>>& data) {
  const std::size_t n = data.size();
  if (!is_power_of_two(n)) {
    throw InvalidArgument("fft: length " + std::to_string(n) + " is not a power of two");
  }
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    // Twiddles evaluated directly; a running product accumulates rounding.
    for (std::size_t k = 0; k < half; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len);
      const std::complex<double> w(std::cos(angle), std::sin(angle));
      for (std::size_t i = 0; i < n; i += len) {
        const auto u = data[i + k];
        const auto v = data[i + k + half] * w;
        data[i + k] = u + v;
        data[i + k + half] = u - v;
      }
    }
  }
}

std::vector<double> dft_magnitude(std::span<const double> frame) {
  if (!is_power_of_two(frame.size())) {
    throw InvalidArgument("dft_magnitude: length " + std::to_string(frame.size()) +
                          " is not a power of two");
  }
  std::vector<std::complex<double>> buf(frame.begin(), frame.end());
  fft_inplace(buf);
  std::vector<double> mag(frame.size() / 2 + 1);
  for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(buf[k]);
  return mag;
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

}  // namespace hisense::audio
