#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include "hisense/error.hpp"
#include "hisense/pipeline.hpp"
#include "hisense/random.hpp"

namespace stream = hisense::stream;
using hisense::audio::AudioSegment;
using hisense::hdc::Label;

namespace {

std::vector<AudioSegment> stubs(const std::vector<bool>& aoi) {
  std::vector<AudioSegment> out;
  for (bool a : aoi) out.emplace_back(std::vector<double>{0.0}, 1, 1.0, a ? Label::kPositive : Label::kNegative);
  return out;
}

struct Expected {
  std::size_t transmitted = 0;
  std::set<std::size_t> delivered;
};

// Direct simulation of the buffer policy: a detection at i sends the last
// `b` segments still held (since the last flush), skipping ones already sent
// when deduplicating.
Expected simulate(const std::vector<double>& s, double t, std::size_t b, bool dedupe, bool flush) {
  Expected e;
  std::size_t window_start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(s[i] > t)) continue;
    const std::size_t lo = std::max(window_start, i + 1 >= b ? i + 1 - b : 0);
    for (std::size_t j = lo; j <= i; ++j) {
      if (dedupe && e.delivered.contains(j)) continue;
      ++e.transmitted;
      e.delivered.insert(j);
    }
    if (flush) window_start = i + 1;
  }
  return e;
}

}  // namespace

TEST(RingBuffer, EvictsOldestAndMarks) {
  stream::RingBuffer buf(2);
  EXPECT_FALSE(buf.push(AudioSegment({0.1}, 1, 1.0)).has_value());
  EXPECT_FALSE(buf.push(AudioSegment({0.2}, 1, 1.0)).has_value());
  const auto ev = buf.push(AudioSegment({0.3}, 1, 1.0));
  ASSERT_TRUE(ev.has_value());
  EXPECT_DOUBLE_EQ(ev->samples()[0], 0.1);
  EXPECT_EQ(buf.pushed(), 3u);
  EXPECT_EQ(buf.mark_transmitted(true), std::vector<std::size_t>({1, 2}));
  EXPECT_TRUE(buf.mark_transmitted(true).empty());
  EXPECT_EQ(buf.mark_transmitted(false), std::vector<std::size_t>({1, 2}));
  EXPECT_THROW(stream::RingBuffer(0), hisense::InvalidArgument);
}

TEST(Pipeline, StepRequiresScorer) {
  stream::PipelineConfig cfg;
  stream::RingBuffer buf(4);
  stream::TransmissionLog log;
  EXPECT_THROW(stream::step(cfg, buf, AudioSegment({0.0}, 1, 1.0), log), hisense::StateError);
}

TEST(Pipeline, ScorerFailureCarriesIndex) {
  stream::PipelineConfig cfg;
  cfg.scorer = [](const AudioSegment&, std::size_t i) -> double {
    if (i == 2) throw std::runtime_error("boom");
    return 0.0;
  };
  try {
    stream::run_stream(cfg, stubs({false, false, false, false}));
    FAIL();
  } catch (const stream::StreamError& e) {
    EXPECT_EQ(e.index(), 2u);
  }
}

TEST(Pipeline, MatchesDirectSimulation) {
  hisense::Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.index(60);
    const std::size_t b = 1 + rng.index(6);
    const bool dedupe = rng.bernoulli(0.7);
    const bool flush = rng.bernoulli(0.3);
    const double t = rng.uniform(-0.5, 0.8);
    std::vector<double> s(n);
    std::vector<bool> aoi(n);
    for (std::size_t i = 0; i < n; ++i) {
      aoi[i] = rng.bernoulli(0.2);
      s[i] = rng.uniform(-1.0, 1.0) + (aoi[i] ? 0.5 : 0.0);
    }
    stream::PipelineConfig cfg;
    cfg.buffer_capacity = b;
    cfg.t_score = t;
    cfg.dedupe = dedupe;
    cfg.flush_on_transmit = flush;
    cfg.scorer = stream::cached_scorer(s);
    const auto log = stream::run_stream(cfg, stubs(aoi));
    const auto exp = simulate(s, t, b, dedupe, flush);
    ASSERT_EQ(log.transmitted_count, exp.transmitted) << "trial " << trial;
    EXPECT_EQ(log.total_count, n);
    EXPECT_EQ(log.labeled_count, n);
    hisense::eval::ConfusionCounts c;
    for (std::size_t i = 0; i < n; ++i) {
      const bool d = exp.delivered.contains(i);
      if (d) {
        (aoi[i] ? c.tp : c.fp)++;
      } else {
        (aoi[i] ? c.fn : c.tn)++;
      }
    }
    EXPECT_EQ(log.counts, c) << "trial " << trial;
    ASSERT_EQ(log.events.size(), n);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_EQ(log.events[i].segment_index, i);
      EXPECT_EQ(log.events[i].transmitted, s[i] > t);
    }
  }
}

TEST(Pipeline, QualityLossAndFraction) {
  stream::PipelineConfig cfg;
  cfg.buffer_capacity = 1;
  cfg.t_score = 0.5;
  cfg.scorer = stream::cached_scorer({0.9, 0.1, 0.1, 0.9});
  const auto log = stream::run_stream(cfg, stubs({true, true, false, false}));
  EXPECT_DOUBLE_EQ(log.transmitted_fraction(), 0.5);
  EXPECT_DOUBLE_EQ(log.quality_loss(), 0.5);
  EXPECT_DOUBLE_EQ(stream::TransmissionLog{}.quality_loss(), 0.0);
}

TEST(Pipeline, CachedScorerBounds) {
  const auto s = stream::cached_scorer({0.1});
  EXPECT_DOUBLE_EQ(s(AudioSegment({0.0}, 1, 1.0), 0), 0.1);
  EXPECT_THROW(s(AudioSegment({0.0}, 1, 1.0), 1), hisense::Error);
}

TEST(Pipeline, QueueDrainMatchesRunStream) {
  std::vector<double> s{0.1, 0.9, 0.2, 0.3, 0.95, 0.0, 0.1};
  std::vector<bool> aoi{false, true, false, false, true, false, false};
  stream::PipelineConfig cfg;
  cfg.t_score = 0.5;
  cfg.scorer = stream::cached_scorer(s);
  const auto segs = stubs(aoi);
  const auto ref = stream::run_stream(cfg, segs);

  stream::BoundedQueue<AudioSegment> q(2);
  std::thread producer([&] {
    for (const auto& seg : segs) q.push(seg);
    q.close();
  });
  const auto log = stream::drain(cfg, q);
  producer.join();
  EXPECT_EQ(log.transmitted_count, ref.transmitted_count);
  EXPECT_EQ(log.counts, ref.counts);
}

TEST(Pipeline, LogCsvListsTransmittedIds) {
  stream::PipelineConfig cfg;
  cfg.buffer_capacity = 3;
  cfg.t_score = 0.5;
  cfg.scorer = stream::cached_scorer({0.1, 0.2, 0.9});
  const auto log = stream::run_stream(cfg, stubs({false, false, true}));
  const auto path = std::filesystem::temp_directory_path() / "hisense_test_log.csv";
  stream::write_log_csv(path, log, "config_hash=z");
  std::ifstream in(path);
  std::string all((std::istreambuf_iterator<char>(in)), {});
  EXPECT_NE(all.find("# config_hash=z"), std::string::npos);
  EXPECT_NE(all.find("index,score,decision,transmitted_ids"), std::string::npos);
  EXPECT_NE(all.find("transmit,0;1;2"), std::string::npos);
  std::filesystem::remove(path);
  EXPECT_NE(stream::log_summary_json(log, cfg, "abc").find("\"config_hash\": \"abc\""), std::string::npos);
}
