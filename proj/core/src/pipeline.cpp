#include "hisense/pipeline.hpp"

#include <fstream>
#include <iomanip>
#include <memory>

#include "json.hpp"

namespace hisense::stream {

RingBuffer::RingBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw InvalidArgument("RingBuffer: capacity must be at least 1");
}

std::optional<AudioSegment> RingBuffer::push(AudioSegment seg) {
  slots_.push_back(BufferSlot{std::move(seg), pushed_++, false});
  if (slots_.size() <= capacity_) return std::nullopt;
  AudioSegment evicted = std::move(slots_.front().segment);
  slots_.pop_front();
  return evicted;
}

std::vector<std::size_t> RingBuffer::mark_transmitted(bool only_new) {
  std::vector<std::size_t> ids;
  for (auto& slot : slots_) {
    if (only_new && slot.transmitted) continue;
    slot.transmitted = true;
    ids.push_back(slot.index);
  }
  return ids;
}

double TransmissionLog::transmitted_fraction() const {
  return total_count == 0 ? 0.0 : static_cast<double>(transmitted_count) / static_cast<double>(total_count);
}

double TransmissionLog::quality_loss() const {
  const std::size_t positives = counts.tp + counts.fn;
  return positives == 0 ? 0.0 : static_cast<double>(counts.fn) / static_cast<double>(positives);
}

Decision step(const PipelineConfig& cfg, RingBuffer& buffer, AudioSegment seg, TransmissionLog& log) {
  if (!cfg.scorer) throw StateError("pipeline: no scorer configured");
  const std::size_t index = buffer.pushed();
  double s = 0.0;
  try {
    s = cfg.scorer(seg, index);
  } catch (const StreamError&) {
    throw;
  } catch (const std::exception& e) {
    throw StreamError(index, e.what());
  }
  buffer.push(std::move(seg));

  Decision decision;
  if (s > cfg.t_score) {
    decision.transmit = true;
    decision.segment_ids = buffer.mark_transmitted(cfg.dedupe);
    if (cfg.flush_on_transmit) buffer.clear();
  }
  log.events.push_back({index, s, decision.transmit, decision.segment_ids});
  log.transmitted_count += decision.segment_ids.size();
  ++log.total_count;
  return decision;
}

namespace {

// Shared by run_stream and drain: feeds segments and tracks delivery.
class StreamRunner {
 public:
  explicit StreamRunner(const PipelineConfig& cfg) : cfg_(cfg), buffer_(cfg.buffer_capacity) {}

  void feed(AudioSegment seg) {
    truth_.push_back(seg.label());
    delivered_.push_back(false);
    const auto decision = step(cfg_, buffer_, std::move(seg), log_);
    for (std::size_t id : decision.segment_ids) delivered_[id] = true;
  }

  TransmissionLog finish() {
    for (std::size_t i = 0; i < truth_.size(); ++i) {
      if (!truth_[i]) continue;
      ++log_.labeled_count;
      const bool positive = *truth_[i] == hdc::Label::kPositive;
      if (delivered_[i]) {
        (positive ? log_.counts.tp : log_.counts.fp)++;
      } else {
        (positive ? log_.counts.fn : log_.counts.tn)++;
      }
    }
    return std::move(log_);
  }

 private:
  const PipelineConfig& cfg_;
  RingBuffer buffer_;
  TransmissionLog log_;
  std::vector<std::optional<hdc::Label>> truth_;
  std::vector<bool> delivered_;
};

}  // namespace

TransmissionLog run_stream(const PipelineConfig& cfg, std::span<const AudioSegment> segments) {
  StreamRunner runner(cfg);
  for (const auto& seg : segments) runner.feed(seg);
  return runner.finish();
}

TransmissionLog drain(const PipelineConfig& cfg, BoundedQueue<AudioSegment>& queue) {
  StreamRunner runner(cfg);
  while (auto seg = queue.pop()) runner.feed(std::move(*seg));
  return runner.finish();
}

Scorer cached_scorer(std::vector<double> scores) {
  auto table = std::make_shared<const std::vector<double>>(std::move(scores));
  return [table](const AudioSegment&, std::size_t index) {
    if (index >= table->size()) throw InvalidArgument("cached_scorer: index beyond cached stream");
    return (*table)[index];
  };
}

void write_log_csv(const std::filesystem::path& path, const TransmissionLog& log,
                   const std::string& header_comment) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  out << "index,score,decision,transmitted_ids\n";
  for (const auto& e : log.events) {
    out << e.segment_index << ',' << e.score << ',' << (e.transmitted ? "transmit" : "hold") << ',';
    for (std::size_t i = 0; i < e.transmitted_ids.size(); ++i) {
      if (i) out << ';';
      out << e.transmitted_ids[i];
    }
    out << '\n';
  }
}

std::string log_summary_json(const TransmissionLog& log, const PipelineConfig& cfg,
                             const std::string& config_hash) {
  nlohmann::ordered_json j;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  j["total_count"] = log.total_count;
  j["transmitted_count"] = log.transmitted_count;
  j["transmitted_fraction"] = log.transmitted_fraction();
  j["labeled_count"] = log.labeled_count;
  j["tp"] = log.counts.tp;
  j["fp"] = log.counts.fp;
  j["tn"] = log.counts.tn;
  j["fn"] = log.counts.fn;
  j["quality_loss"] = log.quality_loss();
  j["delivered_tpr"] = log.counts.tpr();
  j["delivered_fpr"] = log.counts.fpr();
  j["buffer_capacity"] = cfg.buffer_capacity;
  j["t_score"] = cfg.t_score;
  j["dedupe"] = cfg.dedupe;
  j["flush_on_transmit"] = cfg.flush_on_transmit;
  return j.dump(2);
}

}  // namespace hisense::stream
