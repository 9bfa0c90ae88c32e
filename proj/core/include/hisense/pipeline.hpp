#pragma once

// The deployed near-sensor loop. Segments enter a fixed-capacity FIFO; the
// newest segment is scored on arrival, and when its score clears the
// threshold the buffer contents are transmitted as context. Because scoring
// happens on push, a segment is always classified before it can be evicted.

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hisense/audio.hpp"
#include "hisense/error.hpp"
#include "hisense/metrics.hpp"

namespace hisense::stream {

using audio::AudioSegment;

struct BufferSlot {
  AudioSegment segment;
  std::size_t index;  // position in the stream
  bool transmitted = false;
};

class RingBuffer {
 public:
  explicit RingBuffer(std::size_t capacity);

  // Appends `seg` with the next stream index; returns the evicted oldest
  // segment when capacity is exceeded.
  std::optional<AudioSegment> push(AudioSegment seg);

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return slots_.size(); }
  bool empty() const noexcept { return slots_.empty(); }
  std::size_t pushed() const noexcept { return pushed_; }
  const std::deque<BufferSlot>& slots() const noexcept { return slots_; }

  // Flags slots as transmitted and returns their stream indices, oldest
  // first. With only_new, slots already flagged are skipped.
  std::vector<std::size_t> mark_transmitted(bool only_new);
  void clear() { slots_.clear(); }

 private:
  std::size_t capacity_;
  std::size_t pushed_ = 0;
  std::deque<BufferSlot> slots_;
};

// Maps a segment (and its stream index) to a classifier score.
using Scorer = std::function<double(const AudioSegment&, std::size_t index)>;

struct PipelineConfig {
  std::size_t buffer_capacity = 4;
  double t_score = 0.0;
  bool dedupe = true;             // never resend a slot already transmitted
  bool flush_on_transmit = false;  // empty the buffer after each transmission
  Scorer scorer;
};

struct StepEvent {
  std::size_t segment_index = 0;
  double score = 0.0;
  bool transmitted = false;
  std::vector<std::size_t> transmitted_ids;
};

struct TransmissionLog {
  std::vector<StepEvent> events;
  // Delivery-level counts: a segment is "predicted positive" when it reached
  // the cloud in any transmission, directly or as buffered context.
  eval::ConfusionCounts counts;
  std::size_t transmitted_count = 0;
  std::size_t total_count = 0;
  std::size_t labeled_count = 0;

  double transmitted_fraction() const;
  // Fraction of ground-truth positives never delivered; 0 without positives.
  double quality_loss() const;
};

struct Decision {
  bool transmit = false;
  std::vector<std::size_t> segment_ids;
};

// Thrown when scoring a segment fails; carries the stream position.
class StreamError : public Error {
 public:
  StreamError(std::size_t index, const std::string& what)
      : Error("segment " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

// Scores `seg`, pushes it, and transmits the buffer when score > t_score.
// Appends the event to `log` (counters are filled by run_stream).
Decision step(const PipelineConfig& cfg, RingBuffer& buffer, AudioSegment seg, TransmissionLog& log);

// Runs the whole stream through a fresh buffer and fills the delivery-level
// confusion counts for segments carrying a label.
TransmissionLog run_stream(const PipelineConfig& cfg, std::span<const AudioSegment> segments);

// Scores precomputed per stream index, for replaying one stream under many
// thresholds.
Scorer cached_scorer(std::vector<double> scores);

void write_log_csv(const std::filesystem::path& path, const TransmissionLog& log,
                   const std::string& header_comment = {});
std::string log_summary_json(const TransmissionLog& log, const PipelineConfig& cfg,
                             const std::string& config_hash = {});

// Blocking bounded handoff between an audio producer and the pipeline loop.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

  // Blocks while full. Returns false if the queue was closed.
  bool push(T item) {
    std::unique_lock lock(mutex_);
    not_full_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
    if (closed_) return false;
    items_.push_back(std::move(item));
    not_empty_.notify_one();
    return true;
  }

  // Blocks while empty; nullopt once closed and drained.
  std::optional<T> pop() {
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return item;
  }

  void close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

 private:
  std::size_t capacity_;
  std::deque<T> items_;
  bool closed_ = false;
  std::mutex mutex_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
};

// Event loop: consumes segments until the queue is closed. Equivalent to
// run_stream over the same sequence.
TransmissionLog drain(const PipelineConfig& cfg, BoundedQueue<AudioSegment>& queue);

}  // namespace hisense::stream
