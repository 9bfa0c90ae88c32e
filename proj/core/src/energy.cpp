#include "hisense/energy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "hisense/error.hpp"

namespace hisense::energy {

namespace {

void finish(EnergyReport& r, double conventional_total) {
  r.total = r.edge + r.comm + r.cloud;
  r.normalized_total = conventional_total > 0.0 ? r.total / conventional_total : 0.0;
}

std::ofstream open_csv(const std::filesystem::path& path, const std::string& header_comment) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  return out;
}

}  // namespace

void EnergyParams::validate() const {
  for (double e : {e_edge, e_comm, e_cloud, e_edge_comp, accelerator_factor}) {
    if (!(e >= 0.0) || !std::isfinite(e)) throw InvalidArgument("EnergyParams: energies must be finite and >= 0");
  }
  if (!(compression_ratio > 0.0 && compression_ratio <= 1.0)) {
    throw InvalidArgument("EnergyParams: compression_ratio must be in (0, 1]");
  }
  if (!(p_aoi >= 0.0 && p_aoi <= 1.0)) throw InvalidArgument("EnergyParams: p_aoi must be in [0, 1]");
}

EnergyParams EnergyParams::on_cpu_gpu() const {
  EnergyParams p = *this;
  p.e_edge *= accelerator_factor;
  return p;
}

EnergyReport conventional_energy(std::size_t n_segments, const EnergyParams& params) {
  params.validate();
  const auto n = static_cast<double>(n_segments);
  EnergyReport r;
  r.comm = n * params.e_comm;
  r.cloud = n * params.e_cloud;
  r.total = r.comm + r.cloud;
  r.normalized_total = n_segments > 0 ? 1.0 : 0.0;
  return r;
}

EnergyReport compressive_energy(std::size_t n_segments, const EnergyParams& params) {
  params.validate();
  const auto n = static_cast<double>(n_segments);
  EnergyReport r;
  r.edge = n * params.e_edge_comp;
  r.comm = n * params.e_comm * params.compression_ratio;
  r.cloud = n * params.e_cloud;
  finish(r, conventional_energy(n_segments, params).total);
  return r;
}

EnergyReport ours_energy(double total_count, double transmitted_count, const EnergyParams& params) {
  params.validate();
  if (total_count < 0.0 || transmitted_count < 0.0) throw InvalidArgument("ours_energy: negative count");
  EnergyReport r;
  r.edge = total_count * params.e_edge;
  r.comm = transmitted_count * params.e_comm;
  r.cloud = transmitted_count * params.e_cloud;
  finish(r, total_count * (params.e_comm + params.e_cloud));
  return r;
}

EnergyReport ours_energy(const stream::TransmissionLog& log, const EnergyParams& params) {
  return ours_energy(static_cast<double>(log.total_count), static_cast<double>(log.transmitted_count), params);
}

double expected_transmitted_fraction(double p_aoi, double tpr, double fpr) {
  return p_aoi * tpr + (1.0 - p_aoi) * fpr;
}

ScoredStream score_stream(std::span<const audio::AudioSegment> segments, const stream::Scorer& scorer) {
  ScoredStream out;
  out.scores.reserve(segments.size());
  out.aoi.reserve(segments.size());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& label = segments[i].label();
    if (!label) throw InvalidArgument("score_stream: segment " + std::to_string(i) + " has no label");
    out.scores.push_back(scorer(segments[i], i));
    out.aoi.push_back(*label == hdc::Label::kPositive);
  }
  return out;
}

stream::TransmissionLog replay(const ScoredStream& stream, const stream::PipelineConfig& cfg) {
  if (stream.scores.size() != stream.aoi.size()) throw InvalidArgument("replay: scores and labels differ in length");
  // Audio is not needed once scores are cached; one-sample stand-ins carry the labels.
  std::vector<audio::AudioSegment> stubs;
  stubs.reserve(stream.aoi.size());
  const std::vector<double> one{0.0};
  for (bool positive : stream.aoi) {
    stubs.emplace_back(one, 1, 1.0, positive ? hdc::Label::kPositive : hdc::Label::kNegative);
  }
  stream::PipelineConfig c = cfg;
  c.scorer = stream::cached_scorer(stream.scores);
  return stream::run_stream(c, stubs);
}

std::vector<TradeoffPoint> tradeoff_sweep(const ScoredStream& stream, const stream::PipelineConfig& base,
                                          const EnergyParams& params, std::vector<double> thresholds) {
  std::sort(thresholds.begin(), thresholds.end());
  std::vector<TradeoffPoint> points;
  points.reserve(thresholds.size());
  for (double t : thresholds) {
    stream::PipelineConfig cfg = base;
    cfg.t_score = t;
    const auto log = replay(stream, cfg);
    TradeoffPoint p;
    p.t_score = t;
    p.report = ours_energy(log, params);
    p.energy_saving = 1.0 - p.report.normalized_total;
    p.quality_loss = log.quality_loss();
    p.transmitted_fraction = log.transmitted_fraction();
    points.push_back(p);
  }
  return points;
}

std::vector<double> threshold_grid(double lo, double hi, std::size_t count) {
  if (count == 0) return {};
  if (count == 1) return {lo};
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  grid.back() = hi;
  return grid;
}

BreakdownRow breakdown_row(double p_aoi, const std::string& method, const EnergyReport& report) {
  BreakdownRow row{p_aoi, method, 0.0, 0.0, 0.0, report.normalized_total};
  if (report.total > 0.0) {
    row.edge_fraction = report.edge / report.total;
    row.comm_fraction = report.comm / report.total;
    row.cloud_fraction = report.cloud / report.total;
  }
  return row;
}

std::vector<BreakdownRow> breakdown_report(std::size_t n_segments, const EnergyParams& params, double tpr,
                                           double fpr, std::span<const double> p_grid) {
  std::vector<BreakdownRow> rows;
  const auto n = static_cast<double>(n_segments);
  for (double p : p_grid) {
    EnergyParams at = params;
    at.p_aoi = p;
    at.validate();
    const double sent = n * expected_transmitted_fraction(p, tpr, fpr);
    rows.push_back(breakdown_row(p, "conventional", conventional_energy(n_segments, at)));
    rows.push_back(breakdown_row(p, "compressive", compressive_energy(n_segments, at)));
    rows.push_back(breakdown_row(p, "ours_asic", ours_energy(n, sent, at)));
    rows.push_back(breakdown_row(p, "ours_cpu_gpu", ours_energy(n, sent, at.on_cpu_gpu())));
  }
  return rows;
}

void write_tradeoff_csv(const std::filesystem::path& path, std::span<const TradeoffPoint> points,
                        const std::string& header_comment) {
  auto out = open_csv(path, header_comment);
  out << "t_score,energy_saving,quality_loss,transmitted_fraction,edge,comm,cloud,total,normalized_total\n";
  for (const auto& p : points) {
    out << p.t_score << ',' << p.energy_saving << ',' << p.quality_loss << ',' << p.transmitted_fraction << ','
        << p.report.edge << ',' << p.report.comm << ',' << p.report.cloud << ',' << p.report.total << ','
        << p.report.normalized_total << '\n';
  }
}

void write_breakdown_csv(const std::filesystem::path& path, std::span<const BreakdownRow> rows,
                         const std::string& header_comment) {
  auto out = open_csv(path, header_comment);
  out << "p_aoi,method,edge_fraction,comm_fraction,cloud_fraction,normalized_total\n";
  for (const auto& r : rows) {
    out << r.p_aoi << ',' << r.method << ',' << r.edge_fraction << ',' << r.comm_fraction << ','
        << r.cloud_fraction << ',' << r.normalized_total << '\n';
  }
}

}  // namespace hisense::energy
