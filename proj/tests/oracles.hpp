#pragma once

// Reference implementations used only by the tests. Each one is written in
// the most direct form possible and shares no code with the library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

namespace oracle {

// O(N^2) DFT.
inline std::vector<std::complex<double>> naive_dft(std::span<const std::complex<double>> x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double a = -2.0 * std::numbers::pi * static_cast<double>((k * t) % n) / static_cast<double>(n);
      acc += x[t] * std::complex<double>(std::cos(a), std::sin(a));
    }
    out[k] = acc;
  }
  return out;
}

struct BruteRocPoint {
  double fpr;
  double tpr;
};

// Every candidate threshold (each score, plus +inf), classifying score >= t.
inline std::vector<BruteRocPoint> brute_roc(std::span<const double> scores, const std::vector<bool>& positive) {
  std::vector<double> ts(scores.begin(), scores.end());
  std::sort(ts.begin(), ts.end(), std::greater<>());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  double p = 0;
  double n = 0;
  for (bool b : positive) (b ? p : n) += 1;
  std::vector<BruteRocPoint> out{{0.0, 0.0}};
  for (double t : ts) {
    double tp = 0;
    double fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= t) (positive[i] ? tp : fp) += 1;
    }
    out.push_back({fp / n, tp / p});
  }
  return out;
}

// Probability that a random positive outscores a random negative, ties
// counted half (equal to the trapezoidal area under the ROC).
inline double pairwise_auc(std::span<const double> scores, const std::vector<bool>& positive) {
  double wins = 0;
  double pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!positive[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (positive[j]) continue;
      pairs += 1;
      if (scores[i] > scores[j]) wins += 1;
      if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

// Conv net forward pass straight from the definition: per layer a 3x3 zero
// padded cross-correlation plus bias, ReLU, 2x2 floor max pool; then global
// average pooling. Parameters use the library's flat layout.
inline std::vector<double> conv_features(std::span<const double> params, const std::vector<int>& channels,
                                         std::vector<double> input, int h, int w) {
  std::size_t off = 0;
  int cin = 1;
  std::vector<double> x = std::move(input);
  for (int cout : channels) {
    std::vector<double> pre(static_cast<std::size_t>(cout * h * w));
    const std::size_t kbase = off;
    const std::size_t bbase = off + static_cast<std::size_t>(cout * cin * 9);
    for (int o = 0; o < cout; ++o) {
      for (int y = 0; y < h; ++y) {
        for (int xx = 0; xx < w; ++xx) {
          double acc = params[bbase + static_cast<std::size_t>(o)];
          for (int i = 0; i < cin; ++i) {
            for (int ky = 0; ky < 3; ++ky) {
              for (int kx = 0; kx < 3; ++kx) {
                const int sy = y + ky - 1;
                const int sx = xx + kx - 1;
                if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
                acc += params[kbase + static_cast<std::size_t>(((o * cin + i) * 3 + ky) * 3 + kx)] *
                       x[static_cast<std::size_t>((i * h + sy) * w + sx)];
              }
            }
          }
          pre[static_cast<std::size_t>((o * h + y) * w + xx)] = acc;
        }
      }
    }
    off = bbase + static_cast<std::size_t>(cout);
    const int ho = h / 2;
    const int wo = w / 2;
    std::vector<double> pooled(static_cast<std::size_t>(cout * ho * wo));
    for (int o = 0; o < cout; ++o) {
      for (int y = 0; y < ho; ++y) {
        for (int xx = 0; xx < wo; ++xx) {
          double m = 0.0;
          for (int dy = 0; dy < 2; ++dy) {
            for (int dx = 0; dx < 2; ++dx) {
              m = std::max(m, pre[static_cast<std::size_t>((o * h + 2 * y + dy) * w + 2 * xx + dx)]);
            }
          }
          pooled[static_cast<std::size_t>((o * ho + y) * wo + xx)] = m;
        }
      }
    }
    x = std::move(pooled);
    h = ho;
    w = wo;
    cin = cout;
  }
  std::vector<double> features(static_cast<std::size_t>(cin), 0.0);
  for (int c = 0; c < cin; ++c) {
    for (int i = 0; i < h * w; ++i) features[static_cast<std::size_t>(c)] += x[static_cast<std::size_t>(c * h * w + i)];
    features[static_cast<std::size_t>(c)] /= static_cast<double>(h * w);
  }
  return features;
}

}  // namespace oracle
