#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "hisense/error.hpp"
#include "hisense/metrics.hpp"
#include "hisense/random.hpp"
#include "oracles.hpp"

namespace eval = hisense::eval;

namespace {

std::vector<eval::ScoredLabel> zip(const std::vector<double>& s, const std::vector<bool>& p) {
  std::vector<eval::ScoredLabel> out;
  for (std::size_t i = 0; i < s.size(); ++i) out.push_back({s[i], p[i]});
  return out;
}

}  // namespace

TEST(Roc, KnownCurve) {
  const auto roc = eval::roc_curve(zip({0.9, 0.8, 0.7, 0.6}, {true, false, true, false}));
  ASSERT_EQ(roc.points.size(), 5u);
  EXPECT_TRUE(std::isinf(roc.points[0].threshold));
  EXPECT_DOUBLE_EQ(roc.points[1].tpr, 0.5);
  EXPECT_DOUBLE_EQ(roc.points[2].fpr, 0.5);
  EXPECT_DOUBLE_EQ(roc.auc, 0.75);
  EXPECT_EQ(roc.positives, 2u);
  EXPECT_EQ(roc.negatives, 2u);
}

TEST(Roc, TiesShareOnePoint) {
  const auto roc = eval::roc_curve(zip({0.5, 0.5, 0.5}, {true, false, false}));
  ASSERT_EQ(roc.points.size(), 2u);
  EXPECT_DOUBLE_EQ(roc.auc, 0.5);
}

TEST(Roc, RequiresBothClasses) {
  EXPECT_THROW(eval::roc_curve(zip({0.1, 0.2}, {true, true})), hisense::InvalidArgument);
  EXPECT_THROW(eval::roc_curve(zip({0.1, 0.2}, {false, false})), hisense::InvalidArgument);
}

TEST(Roc, MatchesBruteForceAndPairwiseAuc) {
  hisense::Rng rng(10);
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t n = 2 + rng.index(49);
    std::vector<double> s(n);
    std::vector<bool> p(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.index(8)) / 8.0;  // coarse grid forces ties
      p[i] = rng.bernoulli(0.4);
    }
    p[0] = true;
    p[1] = false;
    const auto roc = eval::roc_curve(zip(s, p));
    const auto ref = oracle::brute_roc(s, p);
    ASSERT_EQ(roc.points.size(), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
      EXPECT_EQ(roc.points[i].fpr, ref[i].fpr);
      EXPECT_EQ(roc.points[i].tpr, ref[i].tpr);
    }
    EXPECT_NEAR(roc.auc, oracle::pairwise_auc(s, p), 1e-12);
  }
}

TEST(ChooseThreshold, MaxTprUnderFprBudget) {
  const auto roc = eval::roc_curve(zip({0.9, 0.8, 0.7, 0.6, 0.5}, {true, false, true, true, false}));
  const auto c = eval::choose_threshold(roc, 0.0);
  EXPECT_DOUBLE_EQ(c.threshold, 0.9);
  EXPECT_DOUBLE_EQ(c.fpr, 0.0);
  const auto c2 = eval::choose_threshold(roc, 0.5);
  EXPECT_DOUBLE_EQ(c2.threshold, 0.6);
  EXPECT_DOUBLE_EQ(c2.tpr, 1.0);
  EXPECT_THROW(eval::choose_threshold(roc, 1.5), hisense::InvalidArgument);
}

TEST(StrictThreshold, ConvertsInclusiveToStrict) {
  const double t = eval::strict_threshold(0.4);
  EXPECT_LT(t, 0.4);
  EXPECT_GT(0.4, t);
  EXPECT_EQ(std::nextafter(t, 1.0), 0.4);
  EXPECT_DOUBLE_EQ(eval::strict_threshold(std::numeric_limits<double>::infinity()), 1.0);
  EXPECT_DOUBLE_EQ(eval::strict_threshold(-5.0), -1.0);
}

TEST(Confusion, CountsRatesAndF1) {
  const bool pred[] = {true, true, false, false, true};
  const bool truth[] = {true, false, true, false, true};
  const auto c = eval::confusion(pred, truth);
  EXPECT_EQ(c.tp, 2u);
  EXPECT_EQ(c.fp, 1u);
  EXPECT_EQ(c.fn, 1u);
  EXPECT_EQ(c.tn, 1u);
  EXPECT_DOUBLE_EQ(c.tpr(), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(c.fpr(), 0.5);
  EXPECT_DOUBLE_EQ(eval::f1_score(c), 4.0 / 6.0);
  EXPECT_THROW(eval::f1_score(eval::ConfusionCounts{0, 0, 3, 0}), hisense::InvalidArgument);
}

TEST(Roc, CsvHasAucComment) {
  const auto roc = eval::roc_curve(zip({0.9, 0.1}, {true, false}));
  const auto path = std::filesystem::temp_directory_path() / "hisense_test_roc.csv";
  eval::write_roc_csv(path, roc, "config_hash=x");
  std::ifstream in(path);
  std::string all((std::istreambuf_iterator<char>(in)), {});
  EXPECT_NE(all.find("config_hash=x"), std::string::npos);
  EXPECT_NE(all.find("auc=1"), std::string::npos);
  EXPECT_NE(all.find("threshold,fpr,tpr"), std::string::npos);
  std::filesystem::remove(path);
}
