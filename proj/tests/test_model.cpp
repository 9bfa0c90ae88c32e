#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "hisense/dataset.hpp"
#include "hisense/error.hpp"
#include "hisense/experiments.hpp"
#include "hisense/mlp.hpp"
#include "hisense/near_sensor_model.hpp"
#include "hisense/random.hpp"

namespace model = hisense::model;
namespace eval = hisense::eval;
namespace nn = hisense::nn;
namespace hdc = hisense::hdc;
using hdc::Label;

TEST(FeatureScaler, StandardizesAndScales) {
  const std::vector<std::vector<double>> f{{1, 10, 5}, {3, 10, 5}, {5, 10, 5}};
  const auto s = model::FeatureScaler::fit(f, 2.0);
  const auto z = s.standardize(std::vector<double>{3, 10, 6});
  EXPECT_NEAR(z[0], 0.0, 1e-12);
  EXPECT_NEAR(z[1], 0.0, 1e-12);  // constant feature: inv_std 1
  EXPECT_NEAR(z[2], 1.0, 1e-12);
  const auto a = s.apply(std::vector<double>{5, 10, 5});
  EXPECT_NEAR(a[0], std::sqrt(1.5) * 2.0 / std::sqrt(3.0), 1e-12);
  EXPECT_THROW(s.apply(std::vector<double>{1.0}), hisense::DimensionMismatch);
}

TEST(Frontend, DeskPresetShape) {
  const auto fe = model::FrontendConfig::desk();
  const auto item = hisense::data::synth_item(0, Label::kNegative, 1, {});
  const auto s = model::make_spectrogram(item.segment, fe);
  EXPECT_EQ(s.frames(), 62u);
  EXPECT_EQ(s.bins(), 65u);
  // A 16 kHz clip is resampled to the frontend rate first.
  const hisense::audio::AudioSegment hi(std::vector<double>(16000, 0.1), 16000, 1.0);
  EXPECT_EQ(model::make_spectrogram(hi, fe).frames(), 62u);
}

class SmallModel : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const auto fe = model::FrontendConfig::desk();
    const auto tr = hisense::data::synth_dataset(400, 0.3, 1);
    const auto va = hisense::data::synth_dataset(100, 0.3, 2);
    train_ = new model::LabeledSpectrograms(model::labeled_spectrograms(tr, fe));
    val_ = new model::LabeledSpectrograms(model::labeled_spectrograms(va, fe));
    model::TrainConfig cfg;
    cfg.convnet = nn::ConvNetConfig::with_layers(5);
    cfg.sgd.epochs = 12;
    cfg.dim = 2000;
    result_ = new model::TrainResult(model::train_model(*train_, *val_, fe, cfg));
  }
  static void TearDownTestSuite() {
    delete result_;
    delete train_;
    delete val_;
  }

  static model::LabeledSpectrograms* train_;
  static model::LabeledSpectrograms* val_;
  static model::TrainResult* result_;
};

model::LabeledSpectrograms* SmallModel::train_ = nullptr;
model::LabeledSpectrograms* SmallModel::val_ = nullptr;
model::TrainResult* SmallModel::result_ = nullptr;

TEST_F(SmallModel, LearnsAndPicksThresholdOnValidation) {
  EXPECT_GT(result_->val_roc.auc, 0.8);
  EXPECT_LE(result_->val_choice.fpr, 0.05);
  EXPECT_DOUBLE_EQ(result_->model.classes().t_score(), eval::strict_threshold(result_->val_choice.threshold));
  EXPECT_EQ(result_->model.classes().dim(), 2000u);
  EXPECT_FALSE(result_->retrain_errors.empty());
}

TEST_F(SmallModel, ValidationRocMatchesRescoring) {
  const auto scores = model::score_all(result_->model, val_->inputs);
  const auto roc = model::roc_of(scores, val_->labels);
  EXPECT_DOUBLE_EQ(roc.auc, result_->val_roc.auc);
}

TEST_F(SmallModel, SaveLoadReproducesScores) {
  const auto dir = std::filesystem::temp_directory_path() / "hisense_test_model";
  std::filesystem::remove_all(dir);
  model::save_model(dir, result_->model, "config_hash=t");
  const auto back = model::load_model(dir);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_DOUBLE_EQ(hdc::score(back.classes(), back.hypervector(val_->inputs[i])),
                     hdc::score(result_->model.classes(), result_->model.hypervector(val_->inputs[i])));
  }
  EXPECT_EQ(back.frontend(), result_->model.frontend());
  std::filesystem::remove_all(dir);
  EXPECT_THROW(model::load_model(dir), hisense::Error);
}

TEST_F(SmallModel, FixedThresholdOverridesValidationChoice) {
  model::TrainConfig cfg;
  cfg.convnet = nn::ConvNetConfig::with_layers(5);
  cfg.sgd.epochs = 1;
  cfg.dim = 500;
  cfg.t_score = 0.123;
  const auto r = model::train_model(*train_, *val_, model::FrontendConfig::desk(), cfg);
  EXPECT_DOUBLE_EQ(r.model.classes().t_score(), 0.123);
}

TEST_F(SmallModel, MlpBaselineLearnsFeatures) {
  std::vector<std::vector<double>> tf;
  std::vector<std::vector<double>> vf;
  for (const auto& s : train_->inputs) tf.push_back(result_->model.features(s));
  for (const auto& s : val_->inputs) vf.push_back(result_->model.features(s));
  nn::MlpConfig mc;
  mc.epochs = 60;
  const auto b = eval::mlp_baseline(tf, train_->labels, vf, val_->labels, mc, 0.05);
  EXPECT_GT(b.val_roc.auc, 0.8);
  EXPECT_LE(b.val_roc.points.front().fpr, 0.05);
  for (const auto& f : vf) EXPECT_EQ(b.classify(f), b.probability(f) > b.threshold);
}

TEST(Mlp, GradientMatchesFiniteDifferences) {
  nn::Mlp m(5, 4, 1);
  hisense::Rng rng(2);
  std::vector<double> x(5);
  for (double& v : x) v = rng.normal();
  std::vector<double> g(m.parameters().size(), 0.0);
  m.loss_and_gradient(x, Label::kPositive, g);
  const double h = 1e-6;
  for (std::size_t i = 0; i < g.size(); ++i) {
    // apply_step subtracts its argument.
    nn::Mlp plus = m;
    nn::Mlp minus = m;
    std::vector<double> d(g.size(), 0.0);
    d[i] = -h;
    plus.apply_step(d);
    d[i] = h;
    minus.apply_step(d);
    std::vector<double> scratch(g.size(), 0.0);
    const double lp = plus.loss_and_gradient(x, Label::kPositive, scratch);
    const double lm = minus.loss_and_gradient(x, Label::kPositive, scratch);
    const double num = (lp - lm) / (2 * h);
    EXPECT_NEAR(g[i], num, 1e-5 * std::max(1.0, std::abs(num)));
  }
}

TEST(Mlp, LearnsXorLikeBoundaryAndRejectsOneClass) {
  hisense::Rng rng(3);
  std::vector<std::vector<double>> x;
  std::vector<Label> y;
  for (int i = 0; i < 400; ++i) {
    const double a = rng.uniform(-1, 1);
    const double b = rng.uniform(-1, 1);
    x.push_back({a, b});
    y.push_back(a * b > 0 ? Label::kPositive : Label::kNegative);
  }
  nn::MlpConfig cfg;
  cfg.epochs = 150;
  const auto m = nn::train_mlp(x, y, cfg);
  int correct = 0;
  for (std::size_t i = 0; i < x.size(); ++i) correct += (m.probability(x[i]) > 0.5) == (y[i] == Label::kPositive);
  EXPECT_GT(correct, 340);
  std::vector<Label> one(x.size(), Label::kNegative);
  EXPECT_THROW(nn::train_mlp(x, one, cfg), hisense::TrainingError);
}
