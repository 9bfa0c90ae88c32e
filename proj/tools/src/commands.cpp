#include "hisense/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "hisense/dataset.hpp"
#include "hisense/energy.hpp"
#include "hisense/experiments.hpp"
#include "hisense/pipeline.hpp"
#include "hisense/quantize.hpp"
#include "json.hpp"

namespace hisense::cli {

using nlohmann::ordered_json;

namespace {

// Runs `body`, attributing any failure to `stage`. Data problems always map
// to exit code 2, everything else to `code`.
template <typename F>
auto stage(const std::string& name, int code, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const DatasetError& e) {
    throw StageError(name, kDataError, e.what());
  } catch (const WavError& e) {
    throw StageError(name, kDataError, e.what());
  } catch (const std::exception& e) {
    throw StageError(name, code, e.what());
  }
}

std::string provenance(const Context& ctx) { return "config_hash=" + ctx.hash; }

void write_json(const Context& ctx, const std::string& name, ordered_json body) {
  ordered_json j;
  j["config_hash"] = ctx.hash;
  for (auto& [k, v] : body.items()) j[k] = v;
  std::filesystem::create_directories(ctx.out);
  std::ofstream out(ctx.out / name);
  if (!out) throw Error("cannot write " + (ctx.out / name).string());
  out << j.dump(2) << '\n';
}

data::SynthConfig synth_config(const RunConfig& c) {
  data::SynthConfig s;
  s.sample_rate = c.frontend.sample_rate;
  s.seconds = c.frontend.seconds;
  return s;
}

std::filesystem::path manifest_path(const RunConfig& c) { return c.paths.dataset_root / data::kMetadataFile; }

data::DatasetManifest load_dataset(const Context& ctx) {
  const auto& c = ctx.config;
  if (!std::filesystem::is_directory(c.paths.dataset_root)) {
    throw DatasetError(DatasetError::Kind::kUnreadableFile,
                       "dataset root " + c.paths.dataset_root.string() + " does not exist");
  }
  auto manifest = data::load_manifest(manifest_path(c), c.paths.dataset_root / "audio", c.dataset.positive_class);
  for (const auto& w : manifest.warnings) *ctx.log << "warning: " << w << '\n';
  return manifest;
}

data::SplitPlan split_plan(const RunConfig& c) {
  data::SplitPlan plan;
  plan.train_folds = {c.dataset.train_folds.begin(), c.dataset.train_folds.end()};
  plan.val_folds = {c.dataset.val_folds.begin(), c.dataset.val_folds.end()};
  plan.test_folds = {c.dataset.test_folds.begin(), c.dataset.test_folds.end()};
  plan.oversample_to_ratio = c.dataset.oversample_ratio;
  return plan;
}

model::LabeledSpectrograms spectrograms_of(std::span<const data::ManifestEntry> entries, const RunConfig& c) {
  const auto segments = data::load_segments(entries, c.frontend.sample_rate, c.frontend.seconds);
  return model::labeled_spectrograms(segments, c.frontend);
}

// Training spectrograms with positives duplicated; each file is decoded once.
model::LabeledSpectrograms oversampled_train(std::span<const data::ManifestEntry> entries, const RunConfig& c) {
  const auto unique = spectrograms_of(entries, c);
  std::vector<bool> positive;
  for (auto l : unique.labels) positive.push_back(l == hdc::Label::kPositive);
  model::LabeledSpectrograms out;
  for (std::size_t i : data::oversample_indices(positive, c.dataset.oversample_ratio, c.dataset.oversample_seed)) {
    out.inputs.push_back(unique.inputs[i]);
    out.labels.push_back(unique.labels[i]);
  }
  return out;
}

struct Splits {
  model::LabeledSpectrograms train;
  model::LabeledSpectrograms val;
  model::LabeledSpectrograms test;
};

Splits load_splits(const Context& ctx, bool need_train, bool need_val, bool need_test) {
  const auto manifest = load_dataset(ctx);
  const auto parts = data::split(manifest, split_plan(ctx.config));
  Splits s;
  if (need_train) s.train = oversampled_train(parts.train, ctx.config);
  if (need_val) s.val = spectrograms_of(parts.val, ctx.config);
  if (need_test) s.test = spectrograms_of(parts.test, ctx.config);
  return s;
}

model::NearSensorModel load_trained(const Context& ctx) {
  const auto dir = ctx.out / "model";
  if (!std::filesystem::exists(dir / "frontend.bin")) {
    throw Error("no trained model in " + dir.string() + "; run `hisense train` first");
  }
  return model::load_model(dir);
}

// Threshold in the classifier's strict convention: the configured t_score,
// or the validation ROC point at target_fpr.
double resolve_threshold(const Context& ctx, const hdc::ClassModel& classes, const model::NearSensorModel& m,
                         const model::LabeledSpectrograms& val) {
  if (ctx.config.pipeline.t_score && classes.mode() == m.classes().mode()) return *ctx.config.pipeline.t_score;
  const auto sm = m.with_classes(classes);
  const auto roc = model::roc_of(model::score_all(sm, val.inputs), val.labels);
  return eval::strict_threshold(eval::choose_threshold(roc, ctx.config.pipeline.target_fpr.value_or(0.05)).threshold);
}

energy::ScoredStream scored_stream(const Context& ctx, const model::NearSensorModel& m) {
  const auto& s = ctx.config.stream;
  const auto labels = data::synth_labels(s.n, s.p_aoi, s.seed);
  const auto sc = synth_config(ctx.config);
  energy::ScoredStream out;
  for (std::size_t i = 0; i < s.n; ++i) {
    const auto item = data::synth_item(i, labels[i], s.seed, sc);
    out.scores.push_back(m.score(item.segment));
    out.aoi.push_back(labels[i] == hdc::Label::kPositive);
  }
  return out;
}

stream::PipelineConfig pipeline_config(const RunConfig& c, double t) {
  stream::PipelineConfig p;
  p.buffer_capacity = c.pipeline.buffer_capacity;
  p.t_score = t;
  p.dedupe = c.pipeline.dedupe;
  p.flush_on_transmit = c.pipeline.flush_on_transmit;
  return p;
}

ordered_json report_json(const energy::EnergyReport& r) {
  return {{"edge", r.edge},
          {"comm", r.comm},
          {"cloud", r.cloud},
          {"total", r.total},
          {"normalized_total", r.normalized_total},
          {"energy_saving", 1.0 - r.normalized_total}};
}

// Stream threshold for simulate/energy: the trained model's own threshold
// unless t_score is configured explicitly.
double stream_threshold(const Context& ctx, const model::NearSensorModel& m) {
  return ctx.config.pipeline.t_score.value_or(m.classes().t_score());
}

void update_sweep_csv(const Context& ctx, int layers, double auc) {
  const auto path = ctx.out / "model_size_sweep.csv";
  std::map<int, std::string> rows;
  std::ifstream in(path);
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#' || line.rfind("layers,", 0) == 0) continue;
    rows[std::stoi(line.substr(0, line.find(',')))] = line;
  }
  in.close();
  std::ostringstream row;
  row << std::setprecision(17) << layers << ',' << auc << ',' << ctx.hash;
  rows[layers] = row.str();
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "layers,auc,config_hash\n";
  for (const auto& [k, v] : rows) out << v << '\n';
}

}  // namespace

Context make_context(RunConfig config, std::ostream& log) {
  config.validate();
  Context ctx{std::move(config), {}, {}, &log};
  ctx.hash = config_hash(ctx.config);
  ctx.out = ctx.config.paths.output_dir;
  return ctx;
}

void cmd_prepare(const Context& ctx) {
  const auto& c = ctx.config;
  stage("prepare", kDataError, [&] {
    if (c.dataset.mode == "synthetic") {
      *ctx.log << "writing " << c.dataset.n << " synthetic segments to " << c.paths.dataset_root << '\n';
      data::write_synthetic_dataset(c.paths.dataset_root, c.dataset.n, c.dataset.p_aoi, c.dataset.seed,
                                    synth_config(c));
    }
    const auto manifest = load_dataset(ctx);
    const auto parts = data::split(manifest, split_plan(c));
    std::size_t positives = 0;
    std::map<std::string, std::size_t> folds;
    for (const auto& e : manifest.entries) {
      positives += e.aoi ? 1 : 0;
      folds[std::to_string(e.fold)]++;
    }
    write_json(ctx, "prepare_summary.json",
               {{"mode", c.dataset.mode},
                {"manifest", manifest_path(c).string()},
                {"entries", manifest.entries.size()},
                {"positives", positives},
                {"per_fold", folds},
                {"train", parts.train.size()},
                {"val", parts.val.size()},
                {"test", parts.test.size()},
                {"warnings", manifest.warnings}});
    *ctx.log << manifest.entries.size() << " entries (" << positives << " positive), " << manifest.warnings.size()
             << " warnings\n";
  });
}

void cmd_train(const Context& ctx) {
  const auto& c = ctx.config;
  const auto splits = stage("load dataset", kDataError, [&] { return load_splits(ctx, true, true, false); });
  *ctx.log << "training on " << splits.train.inputs.size() << " spectrograms (" << c.convnet.layers
           << " conv layers, " << c.convnet.epochs << " epochs)\n";
  auto result = stage("train", kTrainingError,
                      [&] { return model::train_model(splits.train, splits.val, c.frontend, c.train_config()); });
  stage("write artifacts", kTrainingError, [&] {
    model::save_model(ctx.out / "model", result.model, provenance(ctx));
    eval::write_roc_csv(ctx.out / "val_roc.csv", result.val_roc, provenance(ctx));
    update_sweep_csv(ctx, c.convnet.layers, result.val_roc.auc);
    const auto& h = result.model.net().loss_history();
    write_json(ctx, "train_summary.json",
               {{"layers", c.convnet.layers},
                {"train_examples", splits.train.inputs.size()},
                {"val_examples", splits.val.inputs.size()},
                {"val_auc", result.val_roc.auc},
                {"t_score", result.model.classes().t_score()},
                {"val_fpr", result.val_choice.fpr},
                {"val_tpr", result.val_choice.tpr},
                {"retrain_errors", result.retrain_errors},
                {"loss_history", std::vector<double>(h.begin(), h.end())}});
  });
  *ctx.log << "validation AUC: " << std::setprecision(4) << result.val_roc.auc << '\n';
}

void cmd_roc(const Context& ctx) {
  const auto m = stage("load model", kEvaluationError, [&] { return load_trained(ctx); });
  const auto splits = stage("load dataset", kDataError, [&] { return load_splits(ctx, false, false, true); });
  stage("roc", kEvaluationError, [&] {
    const auto roc = model::roc_of(model::score_all(m, splits.test.inputs), splits.test.labels);
    eval::write_roc_csv(ctx.out / "roc.csv", roc, provenance(ctx));
    write_json(ctx, "roc_summary.json",
               {{"auc", roc.auc}, {"positives", roc.positives}, {"negatives", roc.negatives}});
    *ctx.log << "test AUC: " << std::setprecision(4) << roc.auc << '\n';
  });
}

void cmd_model_sweep(const Context& ctx) {
  const auto& c = ctx.config;
  const auto splits = stage("load dataset", kDataError, [&] { return load_splits(ctx, true, true, false); });
  const auto rows = stage("model sweep", kTrainingError, [&] {
    return eval::model_size_sweep(c.sweep.layer_counts, splits.train, splits.val, c.frontend, c.train_config());
  });
  stage("write artifacts", kEvaluationError, [&] {
    for (const auto& r : rows) {
      update_sweep_csv(ctx, r.layers, r.auc);
      eval::write_roc_csv(ctx.out / ("val_roc_layers" + std::to_string(r.layers) + ".csv"), r.roc, provenance(ctx));
      *ctx.log << "layers " << r.layers << ": AUC " << std::setprecision(4) << r.auc << '\n';
    }
  });
}

void cmd_simulate(const Context& ctx) {
  const auto& c = ctx.config;
  const auto m = stage("load model", kEvaluationError, [&] { return load_trained(ctx); });
  stage("simulate", kEvaluationError, [&] {
    const double t = stream_threshold(ctx, m);
    const auto ss = scored_stream(ctx, m);
    const auto cfg = pipeline_config(c, t);
    const auto log = energy::replay(ss, cfg);
    stream::write_log_csv(ctx.out / "transmission_log.csv", log, provenance(ctx));
    auto summary = ordered_json::parse(stream::log_summary_json(log, cfg));
    summary["stream_n"] = c.stream.n;
    summary["stream_p_aoi"] = c.stream.p_aoi;
    summary["stream_seed"] = c.stream.seed;
    summary["ours"] = report_json(energy::ours_energy(log, c.energy));
    write_json(ctx, "simulate_summary.json", summary);
    *ctx.log << "transmitted " << log.transmitted_count << " of " << log.total_count << " segments, quality loss "
             << log.quality_loss() << '\n';
  });
}

void cmd_sweep(const Context& ctx) {
  const auto& c = ctx.config;
  const auto m = stage("load model", kEvaluationError, [&] { return load_trained(ctx); });
  stage("sweep", kEvaluationError, [&] {
    const auto ss = scored_stream(ctx, m);
    const auto points = energy::tradeoff_sweep(ss, pipeline_config(c, 0.0), c.energy,
                                               energy::threshold_grid(c.sweep.t_min, c.sweep.t_max, c.sweep.thresholds));
    energy::write_tradeoff_csv(ctx.out / "tradeoff.csv", points, provenance(ctx));
    bool monotone = true;
    for (std::size_t i = 1; i < points.size(); ++i) {
      monotone = monotone && points[i].transmitted_fraction <= points[i - 1].transmitted_fraction &&
                 points[i].quality_loss >= points[i - 1].quality_loss;
    }
    ordered_json best = nullptr;
    for (const auto& p : points) {
      if (p.quality_loss <= 0.05 && (best.is_null() || p.energy_saving > best["energy_saving"].get<double>())) {
        best = {{"t_score", p.t_score}, {"energy_saving", p.energy_saving}, {"quality_loss", p.quality_loss}};
      }
    }
    write_json(ctx, "sweep_summary.json",
               {{"points", points.size()}, {"monotone", monotone}, {"best_with_quality_loss_le_0.05", best}});
    *ctx.log << points.size() << " trade-off points, monotone=" << (monotone ? "yes" : "no") << '\n';
  });
}

void cmd_energy(const Context& ctx) {
  const auto& c = ctx.config;
  const auto m = stage("load model", kEvaluationError, [&] { return load_trained(ctx); });
  stage("energy", kEvaluationError, [&] {
    const double t = stream_threshold(ctx, m);
    const auto ss = scored_stream(ctx, m);
    const auto log = energy::replay(ss, pipeline_config(c, t));
    eval::ConfusionCounts seg;
    for (std::size_t i = 0; i < ss.scores.size(); ++i) {
      const bool pred = ss.scores[i] > t;
      if (pred) {
        (ss.aoi[i] ? seg.tp : seg.fp)++;
      } else {
        (ss.aoi[i] ? seg.fn : seg.tn)++;
      }
    }
    const auto rows = energy::breakdown_report(ss.scores.size(), c.energy, seg.tpr(), seg.fpr(), c.sweep.p_grid);
    energy::write_breakdown_csv(ctx.out / "energy_breakdown.csv", rows, provenance(ctx));
    const auto ours = energy::ours_energy(log, c.energy);
    write_json(ctx, "energy_summary.json",
               {{"t_score", t},
                {"segments", log.total_count},
                {"transmitted", log.transmitted_count},
                {"quality_loss", log.quality_loss()},
                {"segment_tpr", seg.tpr()},
                {"segment_fpr", seg.fpr()},
                {"conventional", report_json(energy::conventional_energy(log.total_count, c.energy))},
                {"compressive", report_json(energy::compressive_energy(log.total_count, c.energy))},
                {"ours", report_json(ours)},
                {"ours_cpu_gpu", report_json(energy::ours_energy(log, c.energy.on_cpu_gpu()))},
                {"energy_saving", 1.0 - ours.normalized_total}});
    *ctx.log << "energy saving " << std::setprecision(4) << 1.0 - ours.normalized_total << ", quality loss "
             << log.quality_loss() << '\n';
  });
}

void cmd_online(const Context& ctx) {
  const auto& c = ctx.config;
  const auto& o = c.online;
  const auto m = stage("load model", kEvaluationError, [&] { return load_trained(ctx); });
  const auto splits = stage("load dataset", kDataError, [&] { return load_splits(ctx, true, true, false); });
  stage("online", kEvaluationError, [&] {
    auto classes = m.classes().with_alpha(o.alpha).with_mode(o.score_mode);
    classes = classes.with_threshold(resolve_threshold(ctx, classes, m, splits.val));

    data::SynthConfig sc = synth_config(c);
    sc.drift_index = o.drift_index;
    sc.centroid_hz = o.centroid_hz;
    sc.drift_centroid_hz = o.drift_centroid_hz;
    const auto labels = data::synth_labels(o.n, o.p_aoi, o.seed);
    std::vector<hdc::Hypervector> hvs;
    std::vector<std::vector<double>> feats;
    for (std::size_t i = 0; i < o.n; ++i) {
      const auto item = data::synth_item(i, labels[i], o.seed, sc);
      feats.push_back(m.features(model::make_spectrogram(item.segment, m.frontend())));
      hvs.push_back(m.encode_features(feats.back()));
    }

    std::vector<std::vector<double>> train_f;
    std::vector<std::vector<double>> val_f;
    for (const auto& s : splits.train.inputs) train_f.push_back(m.features(s));
    for (const auto& s : splits.val.inputs) val_f.push_back(m.features(s));
    nn::MlpConfig mc;
    mc.hidden = o.mlp_hidden;
    mc.epochs = o.mlp_epochs;
    const auto mlp = eval::mlp_baseline(train_f, splits.train.labels, val_f, splits.val.labels, mc,
                                        c.pipeline.target_fpr.value_or(0.05));
    std::vector<bool> mlp_pred;
    for (const auto& f : feats) mlp_pred.push_back(mlp.classify(f));

    eval::OnlineConfig oc;
    oc.feedback_period = o.feedback_period;
    oc.feedback_budget = o.feedback_budget;
    oc.window = o.window;
    oc.buffer_capacity = c.pipeline.buffer_capacity;
    const auto online = eval::online_learning_experiment(hvs, labels, classes, oc);
    oc.feedback_budget = 0;
    const auto frozen = eval::online_learning_experiment(hvs, labels, classes, oc);

    const std::vector<eval::NamedPredictions> series{
        {"online", online.predictions}, {"frozen", frozen.predictions}, {"mlp", mlp_pred}};
    eval::write_online_csv(ctx.out / "online_f1.csv", labels, series, o.window, provenance(ctx));

    std::ofstream rounds(ctx.out / "online_rounds.csv");
    rounds << "# " << provenance(ctx) << "\nat,inspected,flagged,f1_before,f1_after\n" << std::setprecision(17);
    for (const auto& r : online.rounds) {
      rounds << r.at << ',' << r.inspected << ',' << r.flagged << ',' << r.f1_before << ',' << r.f1_after << '\n';
    }

    const std::size_t tail = std::min<std::size_t>(200, o.n);
    const auto final_f1 = [&](const std::vector<bool>& p) {
      const double v = eval::window_f1(p, labels, o.n - tail, o.n);
      return std::isnan(v) ? ordered_json(nullptr) : ordered_json(v);
    };
    write_json(ctx, "online_summary.json",
               {{"score_mode", o.score_mode == hdc::ScoreMode::kMargin ? "margin" : "positive"},
                {"t_score", classes.t_score()},
                {"final_window", tail},
                {"f1_online", final_f1(online.predictions)},
                {"f1_frozen", final_f1(frozen.predictions)},
                {"f1_mlp", final_f1(mlp_pred)},
                {"mlp_val_f1", mlp.val_f1},
                {"feedback_rounds", online.rounds.size()}});
    *ctx.log << "final-window F1: online " << std::setprecision(4) << eval::window_f1(online.predictions, labels, o.n - tail, o.n)
             << ", frozen " << eval::window_f1(frozen.predictions, labels, o.n - tail, o.n) << ", mlp "
             << eval::window_f1(mlp_pred, labels, o.n - tail, o.n) << '\n';
  });
}

void cmd_quantize(const Context& ctx) {
  const auto m = stage("load model", kEvaluationError, [&] { return load_trained(ctx); });
  const auto splits = stage("load dataset", kDataError, [&] { return load_splits(ctx, false, true, true); });
  stage("quantize", kEvaluationError, [&] {
    const std::size_t n_cal = std::min(ctx.config.quantize.calibration_samples, splits.val.inputs.size());
    const auto qnet = nn::quantize_int8(m.net(), std::span<const audio::Spectrogram>(splits.val.inputs).first(n_cal));
    nn::save_quantized(ctx.out / "model" / "convnet_int8.bin", qnet);
    std::vector<double> fs;
    std::vector<double> qs;
    for (const auto& s : splits.test.inputs) {
      fs.push_back(hdc::score(m.classes(), m.hypervector(s)));
      qs.push_back(hdc::score(m.classes(), m.encode_features(nn::forward_int8(qnet, s))));
    }
    const double auc_f = model::roc_of(fs, splits.test.labels).auc;
    const double auc_q = model::roc_of(qs, splits.test.labels).auc;
    std::vector<double> diff;
    for (std::size_t i = 0; i < fs.size(); ++i) diff.push_back(std::abs(fs[i] - qs[i]));
    std::nth_element(diff.begin(), diff.begin() + static_cast<std::ptrdiff_t>(diff.size() / 2), diff.end());
    write_json(ctx, "quantize_summary.json",
               {{"calibration_samples", n_cal},
                {"auc_float", auc_f},
                {"auc_int8", auc_q},
                {"median_abs_score_diff", diff.empty() ? 0.0 : diff[diff.size() / 2]}});
    *ctx.log << "AUC float " << std::setprecision(4) << auc_f << ", int8 " << auc_q << '\n';
  });
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Near-sensor HDC audio detection: data, training, evaluation, simulation, energy."};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_file;
  std::string output_dir;
  std::string dataset_root;
  std::string mode;
  std::optional<std::size_t> n;
  std::optional<double> p_aoi;
  std::optional<std::uint64_t> seed;
  std::optional<int> layers;
  std::optional<int> epochs;
  std::optional<std::size_t> dim;
  std::optional<double> alpha;
  std::optional<double> t_score;
  std::optional<double> target_fpr;
  std::optional<std::size_t> buffer;
  std::optional<std::size_t> stream_n;
  std::optional<double> stream_p;
  std::optional<std::uint64_t> stream_seed;
  std::optional<std::size_t> thresholds;

  app.add_option("-c,--config", config_file, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("-o,--output-dir", output_dir, "Output directory (overrides HISENSE_OUTPUT_DIR)");
  app.add_option("--dataset-root", dataset_root, "Dataset root in UrbanSound8K layout");
  app.add_option("--mode", mode, "Dataset mode: synthetic or real");
  app.add_option("--n", n, "Synthetic dataset size");
  app.add_option("--p-aoi", p_aoi, "Synthetic dataset AoI probability");
  app.add_option("--seed", seed, "Synthetic dataset seed");
  app.add_option("--layers", layers, "Number of conv layers");
  app.add_option("--epochs", epochs, "CNN training epochs");
  app.add_option("--dim", dim, "Hypervector dimensionality");
  app.add_option("--alpha", alpha, "HDC learning rate");
  app.add_option("--t-score", t_score, "Fixed decision threshold");
  app.add_option("--target-fpr", target_fpr, "Choose the threshold on validation at this FPR");
  app.add_option("--buffer", buffer, "FIFO buffer capacity");
  app.add_option("--stream-n", stream_n, "Simulated stream length");
  app.add_option("--stream-p-aoi", stream_p, "Simulated stream AoI probability");
  app.add_option("--stream-seed", stream_seed, "Simulated stream seed");
  app.add_option("--thresholds", thresholds, "Number of thresholds in the trade-off sweep");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"prepare", "Write the synthetic dataset or validate a real one"},
      {"train", "Train the CNN and HDC model; report validation AUC"},
      {"roc", "ROC curve of the trained model on the test split"},
      {"model-sweep", "Validation AUC for each configured layer count"},
      {"simulate", "Run the selective-transmission pipeline over a stream"},
      {"sweep", "Energy saving vs quality loss over a threshold grid"},
      {"energy", "Energy breakdown of all methods"},
      {"online", "Online learning under drift vs frozen HDC and MLP"},
      {"quantize", "Int8 quantization and its AUC"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kDataError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  RunConfig config;
  try {
    if (!config_file.empty()) config = load_config(config_file);
    if (const char* env = std::getenv("HISENSE_OUTPUT_DIR"); env && *env) config.paths.output_dir = env;
    if (!output_dir.empty()) config.paths.output_dir = output_dir;
    if (!dataset_root.empty()) config.paths.dataset_root = dataset_root;
    if (!mode.empty()) config.dataset.mode = mode;
    if (n) config.dataset.n = *n;
    if (p_aoi) config.dataset.p_aoi = *p_aoi;
    if (seed) config.dataset.seed = *seed;
    if (layers) {
      config.convnet.layers = *layers;
      config.convnet.channels.clear();
    }
    if (epochs) config.convnet.epochs = *epochs;
    if (dim) config.hdc.dim = *dim;
    if (alpha) config.hdc.alpha = *alpha;
    if (t_score && target_fpr) throw InvalidArgument("pass only one of --t-score and --target-fpr");
    if (t_score) {
      config.pipeline.t_score = *t_score;
      config.pipeline.target_fpr.reset();
    }
    if (target_fpr) {
      config.pipeline.target_fpr = *target_fpr;
      config.pipeline.t_score.reset();
    }
    if (buffer) config.pipeline.buffer_capacity = *buffer;
    if (stream_n) config.stream.n = *stream_n;
    if (stream_p) config.stream.p_aoi = *stream_p;
    if (stream_seed) config.stream.seed = *stream_seed;
    if (thresholds) config.sweep.thresholds = *thresholds;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }

  try {
    const auto ctx = make_context(std::move(config), std::cout);
    std::cout << command << " (config " << ctx.hash << ", output " << ctx.out << ")\n";
    static const std::map<std::string, void (*)(const Context&)> table{
        {"prepare", cmd_prepare}, {"train", cmd_train},   {"roc", cmd_roc},
        {"model-sweep", cmd_model_sweep}, {"simulate", cmd_simulate}, {"sweep", cmd_sweep},
        {"energy", cmd_energy},   {"online", cmd_online}, {"quantize", cmd_quantize},
    };
    table.at(command)(ctx);
  } catch (const StageError& e) {
    std::cerr << "error in " << command << ", stage " << e.what() << '\n';
    return e.code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kOk;
}

}  // namespace hisense::cli
