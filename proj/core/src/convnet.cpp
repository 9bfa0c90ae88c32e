#include "hisense/convnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hisense/binary_io.hpp"
#include "hisense/error.hpp"
#include "hisense/random.hpp"

namespace hisense::nn {

namespace {

struct LayerShape {
  int cin = 0;
  int cout = 0;
  int h = 0;
  int w = 0;
  int ho = 0;
  int wo = 0;

  std::size_t padded_plane() const { return static_cast<std::size_t>(h + 2) * static_cast<std::size_t>(w + 2); }
  std::size_t plane() const { return static_cast<std::size_t>(h) * static_cast<std::size_t>(w); }
  std::size_t pooled_plane() const { return static_cast<std::size_t>(ho) * static_cast<std::size_t>(wo); }
};

// Intermediate tensors of one forward pass, kept for backprop.
struct Trace {
  std::vector<LayerShape> shapes;
  std::vector<std::vector<double>> inpad;
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> pooled;
  std::vector<std::vector<std::uint32_t>> argmax;
  std::vector<double> features;
  double logit = 0.0;
};

std::vector<LayerShape> plan_shapes(const ConvNet& net, std::size_t frames, std::size_t bins) {
  const std::size_t min_side = net.config().min_input_side();
  if (frames < min_side || bins < min_side) {
    throw ShapeError("spectrogram " + std::to_string(frames) + "x" + std::to_string(bins) +
                     " is too small for " + std::to_string(net.layers()) +
                     " conv layers; minimum input shape is " + std::to_string(min_side) + "x" +
                     std::to_string(min_side));
  }
  std::vector<LayerShape> shapes;
  int h = static_cast<int>(frames);
  int w = static_cast<int>(bins);
  for (int l = 0; l < net.layers(); ++l) {
    LayerShape s{net.in_channels(l), net.out_channels(l), h, w, h / 2, w / 2};
    shapes.push_back(s);
    h = s.ho;
    w = s.wo;
  }
  return shapes;
}

void pad_into(const double* src, const LayerShape& s, std::vector<double>& dst) {
  const std::size_t wp = static_cast<std::size_t>(s.w) + 2;
  dst.assign(static_cast<std::size_t>(s.cin) * s.padded_plane(), 0.0);
  for (int c = 0; c < s.cin; ++c) {
    const double* plane = src + static_cast<std::size_t>(c) * s.plane();
    double* out = dst.data() + static_cast<std::size_t>(c) * s.padded_plane();
    for (int y = 0; y < s.h; ++y) {
      std::copy_n(plane + static_cast<std::size_t>(y) * static_cast<std::size_t>(s.w),
                  s.w, out + static_cast<std::size_t>(y + 1) * wp + 1);
    }
  }
}

void conv3x3_forward(const LayerShape& s, const double* inpad, const double* kernel,
                     const double* bias, double* out) {
  const std::size_t wp = static_cast<std::size_t>(s.w) + 2;
  const std::size_t w = static_cast<std::size_t>(s.w);
  for (int co = 0; co < s.cout; ++co) {
    double* o = out + static_cast<std::size_t>(co) * s.plane();
    std::fill_n(o, s.plane(), bias[co]);
    for (int ci = 0; ci < s.cin; ++ci) {
      const double* src = inpad + static_cast<std::size_t>(ci) * s.padded_plane();
      const double* k = kernel + (static_cast<std::size_t>(co) * static_cast<std::size_t>(s.cin) + static_cast<std::size_t>(ci)) * 9;
      for (int y = 0; y < s.h; ++y) {
        double* orow = o + static_cast<std::size_t>(y) * w;
        for (int ky = 0; ky < 3; ++ky) {
          const double* srow = src + static_cast<std::size_t>(y + ky) * wp;
          const double k0 = k[ky * 3];
          const double k1 = k[ky * 3 + 1];
          const double k2 = k[ky * 3 + 2];
          for (std::size_t x = 0; x < w; ++x) {
            orow[x] += k0 * srow[x] + k1 * srow[x + 1] + k2 * srow[x + 2];
          }
        }
      }
    }
  }
}

void conv3x3_backward(const LayerShape& s, const double* inpad, const double* kernel,
                      const double* dpre, double* dkernel, double* dbias, double* dinpad) {
  const std::size_t wp = static_cast<std::size_t>(s.w) + 2;
  const std::size_t w = static_cast<std::size_t>(s.w);
  for (int co = 0; co < s.cout; ++co) {
    const double* g = dpre + static_cast<std::size_t>(co) * s.plane();
    double gsum = 0.0;
    for (std::size_t i = 0; i < s.plane(); ++i) gsum += g[i];
    dbias[co] += gsum;
    for (int ci = 0; ci < s.cin; ++ci) {
      const std::size_t kidx = (static_cast<std::size_t>(co) * static_cast<std::size_t>(s.cin) + static_cast<std::size_t>(ci)) * 9;
      const double* src = inpad + static_cast<std::size_t>(ci) * s.padded_plane();
      const double* k = kernel + kidx;
      double* dk = dkernel + kidx;
      double acc[9] = {};
      for (int y = 0; y < s.h; ++y) {
        const double* grow = g + static_cast<std::size_t>(y) * w;
        for (int ky = 0; ky < 3; ++ky) {
          const double* srow = src + static_cast<std::size_t>(y + ky) * wp;
          double a0 = 0.0;
          double a1 = 0.0;
          double a2 = 0.0;
          for (std::size_t x = 0; x < w; ++x) {
            a0 += grow[x] * srow[x];
            a1 += grow[x] * srow[x + 1];
            a2 += grow[x] * srow[x + 2];
          }
          acc[ky * 3] += a0;
          acc[ky * 3 + 1] += a1;
          acc[ky * 3 + 2] += a2;
        }
      }
      for (int i = 0; i < 9; ++i) dk[i] += acc[i];
      if (dinpad == nullptr) continue;
      double* dsrc = dinpad + static_cast<std::size_t>(ci) * s.padded_plane();
      for (int y = 0; y < s.h; ++y) {
        const double* grow = g + static_cast<std::size_t>(y) * w;
        for (int ky = 0; ky < 3; ++ky) {
          double* drow = dsrc + static_cast<std::size_t>(y + ky) * wp;
          const double k0 = k[ky * 3];
          const double k1 = k[ky * 3 + 1];
          const double k2 = k[ky * 3 + 2];
          for (std::size_t x = 0; x < w; ++x) {
            drow[x] += k0 * grow[x];
            drow[x + 1] += k1 * grow[x];
            drow[x + 2] += k2 * grow[x];
          }
        }
      }
    }
  }
}

// ReLU followed by 2x2 max pool; records the winning position per output.
void relu_maxpool(const LayerShape& s, const double* pre, double* pooled, std::uint32_t* argmax) {
  const std::size_t w = static_cast<std::size_t>(s.w);
  for (int c = 0; c < s.cout; ++c) {
    const double* p = pre + static_cast<std::size_t>(c) * s.plane();
    double* o = pooled + static_cast<std::size_t>(c) * s.pooled_plane();
    std::uint32_t* a = argmax + static_cast<std::size_t>(c) * s.pooled_plane();
    for (int py = 0; py < s.ho; ++py) {
      for (int px = 0; px < s.wo; ++px) {
        std::size_t best = static_cast<std::size_t>(2 * py) * w + static_cast<std::size_t>(2 * px);
        for (std::size_t idx : {best + 1, best + w, best + w + 1}) {
          if (p[idx] > p[best]) best = idx;
        }
        const std::size_t out = static_cast<std::size_t>(py) * static_cast<std::size_t>(s.wo) + static_cast<std::size_t>(px);
        o[out] = std::max(p[best], 0.0);
        a[out] = static_cast<std::uint32_t>(best);
      }
    }
  }
}

void run_forward(const ConvNet& net, const Spectrogram& input, Trace& tr) {
  tr.shapes = plan_shapes(net, input.frames(), input.bins());
  const auto L = static_cast<std::size_t>(net.layers());
  tr.inpad.resize(L);
  tr.pre.resize(L);
  tr.pooled.resize(L);
  tr.argmax.resize(L);
  const double* current = input.values().data();
  for (std::size_t l = 0; l < L; ++l) {
    const auto& s = tr.shapes[l];
    const int li = static_cast<int>(l);
    pad_into(current, s, tr.inpad[l]);
    tr.pre[l].resize(static_cast<std::size_t>(s.cout) * s.plane());
    conv3x3_forward(s, tr.inpad[l].data(), net.kernel(li).data(), net.bias(li).data(), tr.pre[l].data());
    tr.pooled[l].resize(static_cast<std::size_t>(s.cout) * s.pooled_plane());
    tr.argmax[l].resize(tr.pooled[l].size());
    relu_maxpool(s, tr.pre[l].data(), tr.pooled[l].data(), tr.argmax[l].data());
    current = tr.pooled[l].data();
  }
  const auto& last = tr.shapes.back();
  tr.features.assign(static_cast<std::size_t>(last.cout), 0.0);
  const std::size_t area = last.pooled_plane();
  const auto head = net.head_weights();
  double logit = net.head_bias();
  for (int c = 0; c < last.cout; ++c) {
    const double* p = tr.pooled.back().data() + static_cast<std::size_t>(c) * area;
    double sum = 0.0;
    for (std::size_t i = 0; i < area; ++i) sum += p[i];
    tr.features[static_cast<std::size_t>(c)] = sum / static_cast<double>(area);
    logit += head[static_cast<std::size_t>(c)] * tr.features[static_cast<std::size_t>(c)];
  }
  tr.logit = logit;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double label_value(Label label) { return label == Label::kPositive ? 1.0 : 0.0; }

}  // namespace

ConvNetConfig ConvNetConfig::with_layers(int layers, std::uint64_t seed) {
  static constexpr int kSchedule[] = {8, 16, 32, 32, 64};
  ConvNetConfig c;
  c.num_conv_layers = layers;
  c.seed = seed;
  c.channels.clear();
  for (int l = 0; l < layers; ++l) c.channels.push_back(l < 5 ? kSchedule[l] : 64);
  return c;
}

void ConvNetConfig::validate() const {
  if (num_conv_layers < 1) throw InvalidArgument("ConvNetConfig: need at least one conv layer");
  if (num_conv_layers > 16) throw InvalidArgument("ConvNetConfig: too many conv layers");
  if (channels.size() != static_cast<std::size_t>(num_conv_layers)) {
    throw InvalidArgument("ConvNetConfig: channels_per_layer length must equal num_conv_layers");
  }
  for (int c : channels) {
    if (c < 1) throw InvalidArgument("ConvNetConfig: channel counts must be positive");
  }
}

std::size_t ConvNet::parameter_count_for(const ConvNetConfig& config) {
  config.validate();
  std::size_t n = 0;
  int cin = 1;
  for (int c : config.channels) {
    n += static_cast<std::size_t>(c) * static_cast<std::size_t>(cin) * 9 + static_cast<std::size_t>(c);
    cin = c;
  }
  return n + static_cast<std::size_t>(cin) + 1;
}

ConvNet::ConvNet(ConvNetConfig config) : config_(std::move(config)) {
  params_.assign(parameter_count_for(config_), 0.0);
  offsets_.clear();
  std::size_t off = 0;
  for (int l = 0; l < layers(); ++l) {
    offsets_.push_back(off);
    off += static_cast<std::size_t>(out_channels(l)) * static_cast<std::size_t>(in_channels(l)) * 9 +
           static_cast<std::size_t>(out_channels(l));
  }
  offsets_.push_back(off);

  Rng rng(config_.seed);
  for (int l = 0; l < layers(); ++l) {
    const double stddev = std::sqrt(2.0 / (9.0 * in_channels(l)));
    const std::size_t n = static_cast<std::size_t>(out_channels(l)) * static_cast<std::size_t>(in_channels(l)) * 9;
    for (std::size_t i = 0; i < n; ++i) params_[kernel_offset(l) + i] = rng.normal(0.0, stddev);
  }
  const double head_std = std::sqrt(1.0 / config_.feature_dim());
  for (int i = 0; i < config_.feature_dim(); ++i) {
    params_[head_offset() + static_cast<std::size_t>(i)] = rng.normal(0.0, head_std);
  }
}

ConvNet::ConvNet(ConvNetConfig config, std::vector<double> parameters, bool trained)
    : ConvNet(std::move(config)) {
  if (parameters.size() != params_.size()) {
    throw ShapeError("ConvNet: expected " + std::to_string(params_.size()) + " parameters, got " +
                     std::to_string(parameters.size()));
  }
  for (double v : parameters) {
    if (!std::isfinite(v)) throw InvalidArgument("ConvNet: non-finite weight");
  }
  params_ = std::move(parameters);
  trained_ = trained;
}

std::size_t ConvNet::bias_offset(int layer) const {
  return kernel_offset(layer) +
         static_cast<std::size_t>(out_channels(layer)) * static_cast<std::size_t>(in_channels(layer)) * 9;
}

std::span<const double> ConvNet::kernel(int layer) const {
  return std::span<const double>(params_).subspan(
      kernel_offset(layer),
      static_cast<std::size_t>(out_channels(layer)) * static_cast<std::size_t>(in_channels(layer)) * 9);
}

std::span<const double> ConvNet::bias(int layer) const {
  return std::span<const double>(params_).subspan(bias_offset(layer),
                                                  static_cast<std::size_t>(out_channels(layer)));
}

std::span<const double> ConvNet::head_weights() const {
  return std::span<const double>(params_).subspan(head_offset(),
                                                  static_cast<std::size_t>(config_.feature_dim()));
}

ForwardResult forward(const ConvNet& net, const Spectrogram& input) {
  Trace tr;
  run_forward(net, input, tr);
  return {std::move(tr.features), tr.logit};
}

std::vector<double> extract_features(const ConvNet& net, const Spectrogram& input) {
  if (!net.trained()) throw StateError("extract_features: network has not been trained");
  return forward(net, input).features;
}

std::vector<double> activation_maxima(const ConvNet& net, const Spectrogram& input) {
  Trace tr;
  run_forward(net, input, tr);
  std::vector<double> out;
  double m = 0.0;
  for (double v : input.values()) m = std::max(m, std::abs(v));
  out.push_back(m);
  for (const auto& pooled : tr.pooled) {
    out.push_back(pooled.empty() ? 0.0 : *std::max_element(pooled.begin(), pooled.end()));
  }
  return out;
}

double bce_loss(double logit, Label label) {
  const double y = label_value(label);
  return std::max(logit, 0.0) - y * logit + std::log1p(std::exp(-std::abs(logit)));
}

double loss_and_gradient(const ConvNet& net, const Spectrogram& input, Label label,
                         std::span<double> gradient) {
  if (gradient.size() != net.parameter_count()) {
    throw DimensionMismatch(gradient.size(), net.parameter_count(), "loss_and_gradient");
  }
  Trace tr;
  run_forward(net, input, tr);
  const double loss = bce_loss(tr.logit, label);
  const double dz = sigmoid(tr.logit) - label_value(label);

  const auto L = static_cast<std::size_t>(net.layers());
  const auto& last = tr.shapes.back();
  const std::size_t head = net.head_offset();
  const auto head_w = net.head_weights();
  for (std::size_t c = 0; c < tr.features.size(); ++c) gradient[head + c] += dz * tr.features[c];
  gradient[head + tr.features.size()] += dz;

  std::vector<double> dpooled(static_cast<std::size_t>(last.cout) * last.pooled_plane());
  for (int c = 0; c < last.cout; ++c) {
    const double g = dz * head_w[static_cast<std::size_t>(c)] / static_cast<double>(last.pooled_plane());
    std::fill_n(dpooled.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(c) * last.pooled_plane()),
                last.pooled_plane(), g);
  }

  std::vector<double> dpre;
  std::vector<double> dinpad;
  for (std::size_t li = L; li-- > 0;) {
    const auto& s = tr.shapes[li];
    const int l = static_cast<int>(li);
    dpre.assign(static_cast<std::size_t>(s.cout) * s.plane(), 0.0);
    const auto& pre = tr.pre[li];
    const auto& arg = tr.argmax[li];
    for (int c = 0; c < s.cout; ++c) {
      const std::size_t pbase = static_cast<std::size_t>(c) * s.pooled_plane();
      const std::size_t base = static_cast<std::size_t>(c) * s.plane();
      for (std::size_t p = 0; p < s.pooled_plane(); ++p) {
        const std::size_t idx = base + arg[pbase + p];
        if (pre[idx] > 0.0) dpre[idx] += dpooled[pbase + p];
      }
    }
    double* dinpad_ptr = nullptr;
    if (li > 0) {
      dinpad.assign(static_cast<std::size_t>(s.cin) * s.padded_plane(), 0.0);
      dinpad_ptr = dinpad.data();
    }
    conv3x3_backward(s, tr.inpad[li].data(), net.kernel(l).data(), dpre.data(),
                     gradient.data() + net.kernel_offset(l), gradient.data() + net.bias_offset(l),
                     dinpad_ptr);
    if (li > 0) {
      const std::size_t wp = static_cast<std::size_t>(s.w) + 2;
      dpooled.assign(static_cast<std::size_t>(s.cin) * s.plane(), 0.0);
      for (int c = 0; c < s.cin; ++c) {
        for (int y = 0; y < s.h; ++y) {
          const double* src = dinpad.data() + static_cast<std::size_t>(c) * s.padded_plane() +
                              static_cast<std::size_t>(y + 1) * wp + 1;
          std::copy_n(src, s.w,
                      dpooled.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(c) * s.plane() +
                                                                   static_cast<std::size_t>(y) * static_cast<std::size_t>(s.w)));
        }
      }
    }
  }
  return loss;
}

double mean_loss(const ConvNet& net, std::span<const TrainingExample> samples) {
  if (samples.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : samples) total += bce_loss(forward(net, s.input.get()).logit, s.label);
  return total / static_cast<double>(samples.size());
}

double accuracy(const ConvNet& net, std::span<const TrainingExample> samples) {
  if (samples.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& s : samples) {
    const bool predicted = forward(net, s.input.get()).logit > 0.0;
    if (predicted == (s.label == Label::kPositive)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

ConvNet train_offline(const ConvNet& net, std::span<const TrainingExample> samples,
                      const SgdOptions& options) {
  const auto positives = std::count_if(samples.begin(), samples.end(),
                                       [](const auto& s) { return s.label == Label::kPositive; });
  if (positives == 0 || positives == static_cast<std::ptrdiff_t>(samples.size())) {
    throw TrainingError("train_offline: dataset must contain both labels");
  }
  if (options.batch_size == 0) throw InvalidArgument("train_offline: batch_size must be positive");

  ConvNet out = net;
  const std::size_t n = samples.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> grad(out.parameter_count());
  std::vector<double> velocity(out.parameter_count(), 0.0);
  Rng rng(options.shuffle_seed);

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double total = 0.0;
    for (std::size_t start = 0; start < n; start += options.batch_size) {
      const std::size_t stop = std::min(n, start + options.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = start; i < stop; ++i) {
        const auto& s = samples[order[i]];
        const double loss = loss_and_gradient(out, s.input.get(), s.label, grad);
        if (!std::isfinite(loss)) {
          throw TrainingError("train_offline: non-finite loss at epoch " + std::to_string(epoch) +
                              ", sample " + std::to_string(order[i]) +
                              "; reduce the learning rate");
        }
        total += loss;
      }
      const double inv = 1.0 / static_cast<double>(stop - start);
      auto params = out.mutable_parameters();
      for (std::size_t p = 0; p < params.size(); ++p) {
        velocity[p] = options.momentum * velocity[p] + grad[p] * inv;
        params[p] -= options.learning_rate * velocity[p];
      }
    }
    out.append_loss(total / static_cast<double>(n));
  }
  for (double v : out.parameters()) {
    if (!std::isfinite(v)) throw TrainingError("train_offline: weights diverged to non-finite values");
  }
  out.set_trained(true);
  return out;
}

double gradient_check(const ConvNet& net, const Spectrogram& input, Label label,
                      const GradientCheckOptions& options) {
  std::vector<double> analytic(net.parameter_count(), 0.0);
  loss_and_gradient(net, input, label, analytic);
  if (options.corrupt) options.corrupt(analytic);

  const std::size_t total = net.parameter_count();
  auto probes = static_cast<std::size_t>(std::ceil(options.fraction * static_cast<double>(total)));
  probes = std::clamp<std::size_t>(probes, 1, total);
  std::vector<std::size_t> index(total);
  std::iota(index.begin(), index.end(), std::size_t{0});
  Rng rng(options.seed);
  rng.shuffle(std::span<std::size_t>(index));

  ConvNet probe = net;
  double worst = 0.0;
  for (std::size_t k = 0; k < probes; ++k) {
    const std::size_t i = index[k];
    auto params = probe.mutable_parameters();
    const double original = params[i];
    params[i] = original + options.step;
    const double up = bce_loss(forward(probe, input).logit, label);
    params[i] = original - options.step;
    const double down = bce_loss(forward(probe, input).logit, label);
    params[i] = original;
    const double numeric = (up - down) / (2.0 * options.step);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

void save_convnet(const std::filesystem::path& path, const ConvNet& net, const std::string& provenance) {
  io::BinaryWriter w;
  w.magic("HSCN");
  w.u32(1);
  w.str(provenance);
  w.u32(static_cast<std::uint32_t>(net.layers()));
  for (int c : net.config().channels) w.u32(static_cast<std::uint32_t>(c));
  w.u64(net.config().seed);
  w.u8(net.trained() ? 1 : 0);
  w.f64_array(net.parameters());
  w.f64_array(net.loss_history());
  w.save(path);
}

ConvNet load_convnet(const std::filesystem::path& path) {
  auto r = io::BinaryReader::open(path);
  r.expect_magic("HSCN");
  if (r.u32() != 1) throw FormatError("unsupported HSCN version");
  r.str();
  ConvNetConfig config;
  config.num_conv_layers = static_cast<int>(r.u32());
  if (config.num_conv_layers < 1 || config.num_conv_layers > 16) throw FormatError("HSCN: bad layer count");
  config.channels.clear();
  for (int l = 0; l < config.num_conv_layers; ++l) config.channels.push_back(static_cast<int>(r.u32()));
  config.seed = r.u64();
  const bool trained = r.u8() != 0;
  auto params = r.f64_array();
  auto history = r.f64_array();
  ConvNet net(config, std::move(params), trained);
  for (double v : history) net.append_loss(v);
  return net;
}

}  // namespace hisense::nn
