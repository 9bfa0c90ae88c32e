#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "hisense/cli/commands.hpp"
#include "hisense/cli/config.hpp"
#include "hisense/error.hpp"
#include "json.hpp"

namespace cli = hisense::cli;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "hisense");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST(Config, DefaultsWhenEmpty) {
  const auto c = cli::parse_config("{}");
  EXPECT_EQ(c.dataset.n, 1000u);
  EXPECT_EQ(c.convnet.layers, 5);
  EXPECT_EQ(c.hdc.dim, 10000u);
  EXPECT_EQ(c.frontend, hisense::model::FrontendConfig::desk());
  EXPECT_EQ(c.pipeline.target_fpr, 0.05);
  EXPECT_FALSE(c.pipeline.t_score.has_value());
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, OverridesAndThresholdExclusivity) {
  const auto c = cli::parse_config(R"({"pipeline": {"t_score": 0.3}, "hdc": {"score_mode": "margin"}})");
  EXPECT_EQ(c.pipeline.t_score, 0.3);
  EXPECT_FALSE(c.pipeline.target_fpr.has_value());
  EXPECT_EQ(c.hdc.score_mode, hisense::hdc::ScoreMode::kMargin);
  EXPECT_THROW(cli::parse_config(R"({"pipeline": {"t_score": 0.3, "target_fpr": 0.1}})"), hisense::InvalidArgument);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(cli::parse_config(R"({"hdc": {"dimension": 5}})"), hisense::InvalidArgument);
  EXPECT_THROW(cli::parse_config(R"({"hyper": {}})"), hisense::InvalidArgument);
  EXPECT_THROW(cli::parse_config(R"({"hdc": {"dim": "big"}})"), hisense::InvalidArgument);
  EXPECT_THROW(cli::parse_config("{not json"), hisense::InvalidArgument);
  EXPECT_THROW(cli::parse_config(R"({"dataset": {"mode": "other"}})").validate(), hisense::InvalidArgument);
}

TEST(Config, HashIgnoresPathsButNotParameters) {
  auto a = cli::parse_config("{}");
  auto b = a;
  b.paths.output_dir = "elsewhere";
  EXPECT_EQ(cli::config_hash(a), cli::config_hash(b));
  b.hdc.dim = 512;
  EXPECT_NE(cli::config_hash(a), cli::config_hash(b));
  EXPECT_EQ(cli::config_hash(a).size(), 16u);
  // The canonical form parses back to the same configuration.
  EXPECT_EQ(cli::config_hash(cli::parse_config(cli::canonical_json(a))), cli::config_hash(a));
}

class CliRun : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / "hisense_test_cli";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& s) const { return (dir_ / s).string(); }

  fs::path dir_;
};

TEST_F(CliRun, ExitCodes) {
  EXPECT_EQ(run({"--help"}), cli::kOk);
  EXPECT_EQ(run({"--no-such-flag", "train"}), cli::kDataError);
  EXPECT_EQ(run({}), cli::kDataError);
  EXPECT_EQ(run({"--t-score", "0.1", "--target-fpr", "0.1", "train"}), cli::kDataError);
  // Missing dataset root is a data error.
  EXPECT_EQ(run({"--dataset-root", path("nothing"), "--output-dir", path("out"), "train"}), cli::kDataError);
  // No trained model is an evaluation error.
  EXPECT_EQ(run({"--output-dir", path("out"), "simulate"}), cli::kEvaluationError);
}

TEST_F(CliRun, PrepareWritesDatasetAndSummary) {
  ASSERT_EQ(run({"--dataset-root", path("data"), "--output-dir", path("out"), "--n", "30", "--p-aoi", "0.2",
                 "prepare"}),
            cli::kOk);
  EXPECT_TRUE(fs::exists(path("data/metadata/UrbanSound8K.csv")));
  std::ifstream in(path("out/prepare_summary.json"));
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j["entries"], 30);
  EXPECT_EQ(j["positives"], 6);
  EXPECT_EQ(j["config_hash"].get<std::string>().size(), 16u);
}

TEST_F(CliRun, EnvironmentOutputDirBelowFlag) {
  ::setenv("HISENSE_OUTPUT_DIR", path("env_out").c_str(), 1);
  EXPECT_EQ(run({"--dataset-root", path("data"), "--n", "20", "prepare"}), cli::kOk);
  EXPECT_TRUE(fs::exists(path("env_out/prepare_summary.json")));
  EXPECT_EQ(run({"--dataset-root", path("data"), "--output-dir", path("flag_out"), "--n", "20", "prepare"}),
            cli::kOk);
  EXPECT_TRUE(fs::exists(path("flag_out/prepare_summary.json")));
  ::unsetenv("HISENSE_OUTPUT_DIR");
}

TEST_F(CliRun, ConfigFileIsLoaded) {
  std::ofstream(path("c.json")) << R"({"dataset": {"n": 20, "p_aoi": 0.5}})";
  ASSERT_EQ(run({"-c", path("c.json"), "--dataset-root", path("data"), "--output-dir", path("out"), "prepare"}),
            cli::kOk);
  std::ifstream in(path("out/prepare_summary.json"));
  EXPECT_EQ(nlohmann::json::parse(in)["positives"], 10);
  std::ofstream(path("bad.json")) << R"({"dataset": {"size": 20}})";
  EXPECT_EQ(run({"-c", path("bad.json"), "prepare"}), cli::kDataError);
}
