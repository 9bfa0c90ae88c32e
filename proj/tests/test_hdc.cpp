#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "hisense/error.hpp"
#include "hisense/hdc.hpp"
#include "hisense/random.hpp"

namespace hdc = hisense::hdc;
using hdc::Hypervector;
using hdc::Label;

namespace {

Hypervector hv(std::vector<double> v) { return Hypervector(std::move(v)); }

}  // namespace

TEST(Hypervector, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(hv({}), hisense::InvalidArgument);
  EXPECT_THROW(hv({1.0, NAN}), hisense::InvalidArgument);
  EXPECT_THROW(hv({1.0, INFINITY}), hisense::InvalidArgument);
}

TEST(Hypervector, OperationsMatchElementwiseDefinitions) {
  const auto a = hv({1, -2, 3, 0.5});
  const auto b = hv({-1, 4, 2, 2});
  EXPECT_EQ(hdc::bundle(a, b), hv({0, 2, 5, 2.5}));
  EXPECT_EQ(hdc::bind(a, b), hv({-1, -8, 6, 1}));
  EXPECT_EQ(hdc::permute(a, 1), hv({0.5, 1, -2, 3}));
  EXPECT_EQ(hdc::permute(a, 4), a);
  EXPECT_EQ(hdc::negate(a), hv({-1, 2, -3, -0.5}));
  EXPECT_EQ(hdc::axpy(a, 2.0, b), hv({-1, 6, 7, 4.5}));
  EXPECT_DOUBLE_EQ(hdc::dot(a, b), -1 - 8 + 6 + 1);
  const std::vector<Hypervector> items{a, b, a};
  EXPECT_EQ(hdc::bundle_all(items), hdc::bundle(hdc::bundle(a, b), a));
}

TEST(Hypervector, DimensionAndZeroNormErrors) {
  EXPECT_THROW(hdc::bundle(hv({1, 2}), hv({1, 2, 3})), hisense::DimensionMismatch);
  EXPECT_THROW(hdc::similarity(hv({1, 2}), hv({1, 2, 3})), hisense::DimensionMismatch);
  EXPECT_THROW(hdc::similarity(Hypervector::zeros(3), hv({1, 2, 3})), hisense::ZeroNormError);
  EXPECT_THROW(hdc::bundle_all(std::vector<Hypervector>{}), hisense::InvalidArgument);
}

TEST(Hypervector, SimilarityOfKnownVectors) {
  EXPECT_DOUBLE_EQ(hdc::similarity(hv({1, 0}), hv({0, 1})), 0.0);
  EXPECT_DOUBLE_EQ(hdc::similarity(hv({1, 1}), hv({2, 2})), 1.0);
  EXPECT_DOUBLE_EQ(hdc::similarity(hv({1, 1}), hv({-3, -3})), -1.0);
}

TEST(Hypervector, RandomBipolarIsBipolarAndSeeded) {
  const auto a = hdc::random_bipolar(1000, 5);
  for (double v : a.components()) EXPECT_TRUE(v == 1.0 || v == -1.0);
  EXPECT_EQ(a, hdc::random_bipolar(1000, 5));
  EXPECT_NE(a, hdc::random_bipolar(1000, 6));
}

TEST(Hypervector, RandomVectorsAreQuasiOrthogonal) {
  // cos of two independent Gaussian vectors has std 1/sqrt(D).
  const std::size_t d = 10000;
  double sum_sq = 0.0;
  const int trials = 50;
  for (int t = 0; t < trials; ++t) {
    const double s = hdc::similarity(hdc::random_gaussian(d, 2 * t), hdc::random_gaussian(d, 2 * t + 1));
    sum_sq += s * s;
  }
  EXPECT_NEAR(std::sqrt(sum_sq / trials), 1.0 / std::sqrt(static_cast<double>(d)), 0.004);
}

TEST(Hypervector, BundleStaysSimilarToItsMembers) {
  const std::size_t d = 10000;
  std::vector<Hypervector> items;
  for (int i = 0; i < 5; ++i) items.push_back(hdc::random_bipolar(d, 100 + i));
  const auto sum = hdc::bundle_all(items);
  // Expected cosine to each member is 1/sqrt(5).
  for (const auto& it : items) EXPECT_NEAR(hdc::similarity(sum, it), 1.0 / std::sqrt(5.0), 0.03);
  EXPECT_NEAR(hdc::similarity(sum, hdc::random_bipolar(d, 999)), 0.0, 0.05);
}

TEST(Encoder, MatchesFormulaComponentwise) {
  const auto enc = hdc::EncoderParams::generate(3, 64, 9);
  const std::vector<double> x{0.3, -1.2, 0.7};
  const auto h = hdc::encode(x, enc);
  ASSERT_EQ(h.dim(), 64u);
  for (std::size_t i = 0; i < 64; ++i) {
    const auto f = enc.projection_row(i);
    const double p = f[0] * x[0] + f[1] * x[1] + f[2] * x[2];
    EXPECT_NEAR(h[i], std::cos(p + enc.phases()[i]) * std::sin(p), 1e-12);
  }
  for (double b : enc.phases()) {
    EXPECT_GE(b, 0.0);
    EXPECT_LT(b, 2.0 * std::numbers::pi);
  }
  EXPECT_THROW(hdc::encode(std::vector<double>{1.0}, enc), hisense::DimensionMismatch);
}

TEST(Encoder, PreservesNeighbourhoods) {
  const auto enc = hdc::EncoderParams::generate(8, 10000, 1);
  hisense::Rng rng(4);
  std::vector<double> a(8);
  for (double& v : a) v = rng.normal(0.0, 0.3);
  auto near = a;
  near[0] += 0.02;
  std::vector<double> far(8);
  for (double& v : far) v = rng.normal(0.0, 0.3);
  const auto ha = hdc::encode(a, enc);
  EXPECT_GT(hdc::similarity(ha, hdc::encode(near, enc)), hdc::similarity(ha, hdc::encode(far, enc)));
  EXPECT_GT(hdc::similarity(ha, hdc::encode(near, enc)), 0.9);
}

TEST(ClassModel, ScoreAndStrictClassify) {
  const hdc::ClassModel m(hv({1, 0}), hv({0, 1}), 0.05, 0.5);
  EXPECT_DOUBLE_EQ(hdc::score(m, hv({1, 1})), 1.0 / std::sqrt(2.0));
  EXPECT_TRUE(hdc::classify(m, hv({1, 1})));
  EXPECT_FALSE(hdc::classify(m.with_threshold(1.0), hv({1, 0})));  // tie is negative
  const auto margin = m.with_mode(hdc::ScoreMode::kMargin).with_threshold(0.0);
  EXPECT_DOUBLE_EQ(hdc::score(margin, hv({1, 1})), 0.0);
  EXPECT_FALSE(hdc::classify(margin, hv({1, 1})));
  EXPECT_DOUBLE_EQ(hdc::score(margin, hv({2, 1})), (2 - 1) / std::sqrt(5.0));
}

TEST(ClassModel, TrainInitialBundlesEachClass) {
  const std::vector<hdc::Example> ex{{hv({1, 0, 0}), Label::kPositive},
                                     {hv({0, 1, 0}), Label::kPositive},
                                     {hv({0, 0, 2}), Label::kNegative}};
  const auto m = hdc::train_initial(ex, 0.1, 0.2);
  EXPECT_EQ(m.c_pos(), hv({1, 1, 0}));
  EXPECT_EQ(m.c_neg(), hv({0, 0, 2}));
  EXPECT_DOUBLE_EQ(m.alpha(), 0.1);
  EXPECT_DOUBLE_EQ(m.t_score(), 0.2);
  EXPECT_THROW(hdc::train_initial(std::vector<hdc::Example>{ex[0]}), hisense::InvalidArgument);
}

TEST(ClassModel, RetrainUpdatesOnlyMispredictions) {
  // c_pos = e0, c_neg = e1, threshold 0.5. (1,1,0)/.. scores 0.707: predicted
  // positive. Labelled negative, it must move both class vectors by alpha*h.
  const hdc::ClassModel m(hv({1, 0, 0}), hv({0, 1, 0}), 0.5, 0.5);
  const std::vector<hdc::Example> ex{{hv({1, 1, 0}), Label::kNegative}, {hv({1, 0, 0}), Label::kPositive}};
  const auto r = hdc::retrain_epoch(m, ex);
  EXPECT_EQ(r.errors, 1u);
  EXPECT_EQ(r.model.c_pos(), hv({0.5, -0.5, 0}));
  EXPECT_EQ(r.model.c_neg(), hv({0.5, 1.5, 0}));

  const std::vector<hdc::Example> correct{{hv({1, 0.1, 0}), Label::kPositive}};
  const auto unchanged = hdc::retrain_epoch(m, correct);
  EXPECT_EQ(unchanged.errors, 0u);
  EXPECT_EQ(unchanged.model, m);
  EXPECT_EQ(hdc::online_update(m, correct), m);
  EXPECT_EQ(hdc::online_update(m, ex).c_pos(), r.model.c_pos());
}

TEST(ClassModel, OnlineUpdateMovesScoreTowardsTruth) {
  hisense::Rng rng(1);
  const auto pos = hdc::random_gaussian(2000, 1);
  const auto neg = hdc::random_gaussian(2000, 2);
  const hdc::ClassModel m(pos, neg, 0.2, 0.0);
  const auto h = hdc::random_gaussian(2000, 3);
  const double before = hdc::score(m, h);
  const auto after = hdc::online_update(m, std::vector<hdc::Example>{{h, before > 0 ? Label::kNegative : Label::kPositive}});
  if (before > 0) {
    EXPECT_LT(hdc::score(after, h), before);
  } else {
    EXPECT_GT(hdc::score(after, h), before);
  }
}

TEST(ModelSlot, SnapshotsSurviveStore) {
  const hdc::ClassModel a(hv({1, 0}), hv({0, 1}));
  hdc::ModelSlot slot(a);
  const auto snap = slot.load();
  slot.store(a.with_threshold(0.3));
  EXPECT_DOUBLE_EQ(snap->t_score(), 0.0);
  EXPECT_DOUBLE_EQ(slot.load()->t_score(), 0.3);
}

TEST(ModelIo, RoundTripAndCorruption) {
  const auto enc = hdc::EncoderParams::generate(4, 32, 77);
  const hdc::ClassModel m(hdc::random_gaussian(32, 1), hdc::random_gaussian(32, 2), 0.07, 0.25,
                          hdc::ScoreMode::kMargin);
  const auto path = std::filesystem::temp_directory_path() / "hisense_test_hdc.bin";
  hdc::save_model(path, m, enc, "config_hash=abc");
  const auto loaded = hdc::load_model(path);
  EXPECT_EQ(loaded.model, m);
  EXPECT_EQ(loaded.encoder, enc);

  {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << "NOPE";
  }
  EXPECT_THROW(hdc::load_model(path), hisense::FormatError);
  std::filesystem::remove(path);
}
