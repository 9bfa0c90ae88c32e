#pragma once

// Closed-form energy accounting for the send-everything baseline, the
// compressive baseline and the selective pipeline. Units are abstract; the
// defaults are calibrated, not measured.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hisense/pipeline.hpp"

namespace hisense::energy {

struct EnergyParams {
  double e_edge = 0.05;       // near-sensor inference, per classified segment
  double e_comm = 2.0;        // per transmitted segment
  double e_cloud = 8.0;       // per segment processed in the cloud
  double e_edge_comp = 0.1;   // compression, per segment (compressive baseline)
  double compression_ratio = 0.5;
  double p_aoi = 0.01;
  double accelerator_factor = 23.6;  // CPU/GPU edge energy over ASIC edge energy

  // Throws InvalidArgument when an invariant is violated.
  void validate() const;
  // Same coefficients with the edge term charged at CPU/GPU cost.
  EnergyParams on_cpu_gpu() const;
};

struct EnergyReport {
  double edge = 0.0;
  double comm = 0.0;
  double cloud = 0.0;
  double total = 0.0;
  double normalized_total = 0.0;  // total / conventional total for the same stream
};

EnergyReport conventional_energy(std::size_t n_segments, const EnergyParams& params);
EnergyReport compressive_energy(std::size_t n_segments, const EnergyParams& params);
EnergyReport ours_energy(const stream::TransmissionLog& log, const EnergyParams& params);
// Same accounting from counts alone; fractional counts allow expected values.
EnergyReport ours_energy(double total_count, double transmitted_count, const EnergyParams& params);

// Expected transmitted fraction p*tpr + (1-p)*fpr, ignoring buffered context.
double expected_transmitted_fraction(double p_aoi, double tpr, double fpr);

struct TradeoffPoint {
  double t_score = 0.0;
  double energy_saving = 0.0;  // 1 - normalized_total
  double quality_loss = 0.0;
  double transmitted_fraction = 0.0;
  EnergyReport report;
};

// Scores and ground truth of a labeled stream, computed once and replayed.
struct ScoredStream {
  std::vector<double> scores;
  std::vector<bool> aoi;
};

ScoredStream score_stream(std::span<const audio::AudioSegment> segments, const stream::Scorer& scorer);

// Replays the stream through the pipeline once per threshold (the scorer in
// `base` is ignored). Output is sorted by ascending threshold.
std::vector<TradeoffPoint> tradeoff_sweep(const ScoredStream& stream, const stream::PipelineConfig& base,
                                          const EnergyParams& params, std::vector<double> thresholds);

// Runs the pipeline over a scored stream at the threshold in `cfg`.
stream::TransmissionLog replay(const ScoredStream& stream, const stream::PipelineConfig& cfg);

// `count` evenly spaced thresholds covering [lo, hi].
std::vector<double> threshold_grid(double lo, double hi, std::size_t count);

struct BreakdownRow {
  double p_aoi = 0.0;
  std::string method;
  double edge_fraction = 0.0;
  double comm_fraction = 0.0;
  double cloud_fraction = 0.0;
  double normalized_total = 0.0;
};

BreakdownRow breakdown_row(double p_aoi, const std::string& method, const EnergyReport& report);

// Rows for conventional, compressive, ours (ASIC) and ours (CPU/GPU) at each
// p_aoi, with the selective pipeline's transmissions taken from the closed
// form at the given operating point.
std::vector<BreakdownRow> breakdown_report(std::size_t n_segments, const EnergyParams& params, double tpr,
                                           double fpr, std::span<const double> p_grid);

void write_tradeoff_csv(const std::filesystem::path& path, std::span<const TradeoffPoint> points,
                        const std::string& header_comment = {});
void write_breakdown_csv(const std::filesystem::path& path, std::span<const BreakdownRow> rows,
                         const std::string& header_comment = {});

}  // namespace hisense::energy
