#include "hisense/hdc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hisense/binary_io.hpp"
#include "hisense/error.hpp"
#include "hisense/random.hpp"

namespace hisense::hdc {

namespace {

void require_same_dim(const Hypervector& a, const Hypervector& b, const char* op) {
  if (a.dim() != b.dim()) throw DimensionMismatch(a.dim(), b.dim(), op);
}

template <typename F>
Hypervector zip(const Hypervector& a, const Hypervector& b, const char* op, F f) {
  require_same_dim(a, b, op);
  std::vector<double> out(a.dim());
  const auto x = a.components();
  const auto y = b.components();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(x[i], y[i]);
  return Hypervector(std::move(out));
}

}  // namespace

Hypervector::Hypervector(std::size_t dim) : data_(dim, 0.0) {
  if (dim == 0) throw InvalidArgument("hypervector dimensionality must be positive");
}

Hypervector::Hypervector(std::vector<double> components) : data_(std::move(components)) {
  if (data_.empty()) throw InvalidArgument("hypervector dimensionality must be positive");
  for (double v : data_) {
    if (!std::isfinite(v)) throw InvalidArgument("hypervector component is not finite");
  }
}

Hypervector Hypervector::ones(std::size_t dim) {
  return Hypervector(std::vector<double>(dim, 1.0));
}

double Hypervector::norm() const { return std::sqrt(dot(*this, *this)); }

Hypervector bundle(const Hypervector& a, const Hypervector& b) {
  return zip(a, b, "bundle", [](double x, double y) { return x + y; });
}

Hypervector bundle_all(std::span<const Hypervector> items) {
  if (items.empty()) throw InvalidArgument("bundle_all: empty input");
  std::vector<double> acc(items.front().components().begin(), items.front().components().end());
  for (std::size_t k = 1; k < items.size(); ++k) {
    const auto& h = items[k];
    if (h.dim() != acc.size()) throw DimensionMismatch(acc.size(), h.dim(), "bundle_all");
    const auto c = h.components();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += c[i];
  }
  return Hypervector(std::move(acc));
}

Hypervector bind(const Hypervector& a, const Hypervector& b) {
  return zip(a, b, "bind", [](double x, double y) { return x * y; });
}

Hypervector permute(const Hypervector& h, std::size_t k) {
  const std::size_t d = h.dim();
  const std::size_t shift = k % d;
  std::vector<double> out(d);
  const auto c = h.components();
  for (std::size_t i = 0; i < d; ++i) out[(i + shift) % d] = c[i];
  return Hypervector(std::move(out));
}

Hypervector negate(const Hypervector& h) { return scale(h, -1.0); }

Hypervector scale(const Hypervector& h, double factor) {
  std::vector<double> out(h.components().begin(), h.components().end());
  for (auto& v : out) v *= factor;
  return Hypervector(std::move(out));
}

Hypervector axpy(const Hypervector& a, double factor, const Hypervector& b) {
  return zip(a, b, "axpy", [factor](double x, double y) { return x + factor * y; });
}

double dot(const Hypervector& a, const Hypervector& b) {
  require_same_dim(a, b, "dot");
  const auto x = a.components();
  const auto y = b.components();
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double similarity(const Hypervector& a, const Hypervector& b) {
  require_same_dim(a, b, "similarity");
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) throw ZeroNormError("similarity: zero-norm hypervector");
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

Hypervector random_bipolar(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(dim);
  for (auto& v : out) v = (rng.next_u64() >> 63) ? 1.0 : -1.0;
  return Hypervector(std::move(out));
}

Hypervector random_gaussian(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(dim);
  for (auto& v : out) v = rng.normal();
  return Hypervector(std::move(out));
}

EncoderParams EncoderParams::generate(std::size_t feature_dim, std::size_t dim,
                                      std::uint64_t seed) {
  if (feature_dim == 0 || dim == 0) {
    throw InvalidArgument("encoder: feature_dim and dim must be positive");
  }
  EncoderParams p;
  p.feature_dim_ = feature_dim;
  p.dim_ = dim;
  p.seed_ = seed;
  Rng rng(seed);
  p.projection_.resize(feature_dim * dim);
  for (auto& v : p.projection_) v = rng.normal();
  p.phases_.resize(dim);
  for (auto& v : p.phases_) v = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return p;
}

Hypervector encode(std::span<const double> x, const EncoderParams& enc) {
  if (x.size() != enc.feature_dim()) {
    throw DimensionMismatch(x.size(), enc.feature_dim(), "encode");
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw InvalidArgument("encode: non-finite feature");
  }
  std::vector<double> out(enc.dim());
  const auto phases = enc.phases();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto f = enc.projection_row(i);
    double a = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) a += f[j] * x[j];
    out[i] = std::cos(a + phases[i]) * std::sin(a);
  }
  return Hypervector(std::move(out));
}

ClassModel::ClassModel(Hypervector c_pos, Hypervector c_neg, double alpha, double t_score,
                       ScoreMode mode)
    : c_pos_(std::move(c_pos)),
      c_neg_(std::move(c_neg)),
      alpha_(alpha),
      t_score_(t_score),
      mode_(mode) {
  require_same_dim(c_pos_, c_neg_, "ClassModel");
  if (!(alpha_ >= 0.0) || !std::isfinite(alpha_)) {
    throw InvalidArgument("ClassModel: alpha must be finite and non-negative");
  }
  const double lo = mode_ == ScoreMode::kMargin ? -2.0 : -1.0;
  const double hi = mode_ == ScoreMode::kMargin ? 2.0 : 1.0;
  if (!(t_score_ >= lo && t_score_ <= hi)) {
    throw InvalidArgument("ClassModel: t_score " + std::to_string(t_score_) +
                          " outside the score range");
  }
}

ClassModel ClassModel::with_threshold(double t_score) const {
  return ClassModel(c_pos_, c_neg_, alpha_, t_score, mode_);
}

ClassModel ClassModel::with_alpha(double alpha) const {
  return ClassModel(c_pos_, c_neg_, alpha, t_score_, mode_);
}

ClassModel ClassModel::with_mode(ScoreMode mode) const {
  return ClassModel(c_pos_, c_neg_, alpha_, t_score_, mode);
}

ClassModel ClassModel::with_classes(Hypervector c_pos, Hypervector c_neg) const {
  return ClassModel(std::move(c_pos), std::move(c_neg), alpha_, t_score_, mode_);
}

ClassModel train_initial(std::span<const Example> samples, double alpha, double t_score) {
  std::vector<double> pos;
  std::vector<double> neg;
  std::size_t dim = 0;
  for (const auto& s : samples) {
    if (dim == 0) dim = s.hv.dim();
    if (s.hv.dim() != dim) throw DimensionMismatch(dim, s.hv.dim(), "train_initial");
    auto& acc = s.label == Label::kPositive ? pos : neg;
    if (acc.empty()) acc.assign(dim, 0.0);
    const auto c = s.hv.components();
    for (std::size_t i = 0; i < dim; ++i) acc[i] += c[i];
  }
  if (pos.empty()) throw InvalidArgument("train_initial: no positive samples");
  if (neg.empty()) throw InvalidArgument("train_initial: no negative samples");
  return ClassModel(Hypervector(std::move(pos)), Hypervector(std::move(neg)), alpha, t_score);
}

double score(const ClassModel& model, const Hypervector& h) {
  if (h.dim() != model.dim()) throw DimensionMismatch(h.dim(), model.dim(), "score");
  if (model.c_pos().norm() == 0.0) throw ZeroNormError("score: positive class vector is zero");
  const double s = similarity(h, model.c_pos());
  if (model.mode() == ScoreMode::kMargin) return s - similarity(h, model.c_neg());
  return s;
}

bool classify(const ClassModel& model, const Hypervector& h) {
  return score(model, h) > model.t_score();
}

RetrainResult retrain_epoch(const ClassModel& model, std::span<const Example> samples) {
  ClassModel current = model;
  std::size_t errors = 0;
  for (const auto& s : samples) {
    if (s.hv.dim() != model.dim()) throw DimensionMismatch(s.hv.dim(), model.dim(), "retrain_epoch");
    const bool truth = s.label == Label::kPositive;
    if (classify(current, s.hv) == truth) continue;
    ++errors;
    std::vector<double> pos(current.c_pos().components().begin(), current.c_pos().components().end());
    std::vector<double> neg(current.c_neg().components().begin(), current.c_neg().components().end());
    auto& gain = truth ? pos : neg;
    auto& loss = truth ? neg : pos;
    const auto c = s.hv.components();
    const double alpha = current.alpha();
    for (std::size_t i = 0; i < c.size(); ++i) {
      gain[i] += alpha * c[i];
      loss[i] -= alpha * c[i];
    }
    current = current.with_classes(Hypervector(std::move(pos)), Hypervector(std::move(neg)));
  }
  return {std::move(current), errors};
}

ClassModel online_update(const ClassModel& model, std::span<const Example> feedback) {
  return retrain_epoch(model, feedback).model;
}

ModelSlot::ModelSlot(ClassModel model)
    : current_(std::make_shared<const ClassModel>(std::move(model))) {}

std::shared_ptr<const ClassModel> ModelSlot::load() const {
  std::lock_guard lock(mutex_);
  return current_;
}

void ModelSlot::store(ClassModel model) {
  auto next = std::make_shared<const ClassModel>(std::move(model));
  std::lock_guard lock(mutex_);
  current_ = std::move(next);
}

void save_model(const std::filesystem::path& path, const ClassModel& model,
                const EncoderParams& encoder, const std::string& provenance) {
  if (encoder.dim() != model.dim()) throw DimensionMismatch(encoder.dim(), model.dim(), "save_model");
  io::BinaryWriter w;
  w.magic("HSHD");
  w.u32(1);
  w.str(provenance);
  w.u64(model.dim());
  w.u64(encoder.seed());
  w.u64(encoder.feature_dim());
  w.f64(model.alpha());
  w.f64(model.t_score());
  w.u8(static_cast<std::uint8_t>(model.mode()));
  w.f64_array(model.c_pos().components());
  w.f64_array(model.c_neg().components());
  w.save(path);
}

LoadedModel load_model(const std::filesystem::path& path) {
  auto r = io::BinaryReader::open(path);
  r.expect_magic("HSHD");
  if (r.u32() != 1) throw FormatError("unsupported HSHD version");
  r.str();
  const auto dim = r.u64();
  const auto seed = r.u64();
  const auto feature_dim = r.u64();
  const double alpha = r.f64();
  const double t_score = r.f64();
  const auto mode = static_cast<ScoreMode>(r.u8());
  auto pos = r.f64_array();
  auto neg = r.f64_array();
  if (pos.size() != dim || neg.size() != dim) throw FormatError("HSHD: class vector length");
  return {ClassModel(Hypervector(std::move(pos)), Hypervector(std::move(neg)), alpha, t_score, mode),
          EncoderParams::generate(feature_dim, dim, seed)};
}

}  // namespace hisense::hdc
