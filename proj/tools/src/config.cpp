#include "hisense/cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "hisense/binary_io.hpp"
#include "hisense/error.hpp"
#include "json.hpp"

namespace hisense::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string mode_name(hdc::ScoreMode m) { return m == hdc::ScoreMode::kMargin ? "margin" : "positive"; }

hdc::ScoreMode parse_mode(const std::string& s) {
  if (s == "positive") return hdc::ScoreMode::kPositiveSimilarity;
  if (s == "margin") return hdc::ScoreMode::kMargin;
  throw InvalidArgument("score_mode must be \"positive\" or \"margin\", got \"" + s + "\"");
}

// Reads fields of one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const json& parent, const std::string& name) : name_(name) {
    if (!parent.contains(name)) return;
    obj_ = &parent.at(name);
    if (!obj_->is_object()) throw InvalidArgument("config: \"" + name + "\" must be an object");
  }

  bool has(const std::string& key) const { return obj_ && obj_->contains(key) && !obj_->at(key).is_null(); }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!has(key)) return;
    try {
      out = obj_->at(key).get<T>();
    } catch (const json::exception& e) {
      throw InvalidArgument("config: " + name_ + "." + key + ": " + e.what());
    }
  }

  template <typename T>
  void get(const std::string& key, std::optional<T>& out) {
    T value{};
    if (!has(key)) {
      seen_.insert(key);
      return;
    }
    get(key, value);
    out = value;
  }

  void get_path(const std::string& key, std::filesystem::path& out) {
    std::string s = out.string();
    get(key, s);
    out = s;
  }

  void get_mode(const std::string& key, hdc::ScoreMode& out) {
    std::string s = mode_name(out);
    get(key, s);
    out = parse_mode(s);
  }

  void finish() const {
    if (!obj_) return;
    for (const auto& [key, value] : obj_->items()) {
      if (!seen_.contains(key)) throw InvalidArgument("config: unknown key " + name_ + "." + key);
    }
  }

 private:
  std::string name_;
  const json* obj_ = nullptr;
  std::set<std::string> seen_;
};

}  // namespace

model::TrainConfig RunConfig::train_config() const {
  model::TrainConfig t;
  t.convnet = nn::ConvNetConfig::with_layers(convnet.layers, convnet.seed);
  if (!convnet.channels.empty()) t.convnet.channels = convnet.channels;
  t.sgd.epochs = convnet.epochs;
  t.sgd.learning_rate = convnet.learning_rate;
  t.sgd.momentum = convnet.momentum;
  t.sgd.batch_size = convnet.batch_size;
  t.sgd.shuffle_seed = convnet.shuffle_seed;
  t.dim = hdc.dim;
  t.hdc_seed = hdc.seed;
  t.alpha = hdc.alpha;
  t.encoder_gain = hdc.encoder_gain;
  t.retrain_epochs = hdc.retrain_epochs;
  t.mode = hdc.score_mode;
  t.target_fpr = pipeline.target_fpr.value_or(0.05);
  t.t_score = pipeline.t_score;
  return t;
}

void RunConfig::validate() const {
  if (dataset.mode != "synthetic" && dataset.mode != "real") {
    throw InvalidArgument("config: dataset.mode must be \"synthetic\" or \"real\"");
  }
  if (pipeline.t_score.has_value() == pipeline.target_fpr.has_value()) {
    throw InvalidArgument("config: set exactly one of pipeline.t_score and pipeline.target_fpr");
  }
  if (pipeline.target_fpr && !(*pipeline.target_fpr >= 0.0 && *pipeline.target_fpr <= 1.0)) {
    throw InvalidArgument("config: pipeline.target_fpr must be in [0, 1]");
  }
  if (pipeline.buffer_capacity == 0) throw InvalidArgument("config: pipeline.buffer_capacity must be >= 1");
  if (hdc.dim == 0) throw InvalidArgument("config: hdc.dim must be positive");
  if (!(dataset.p_aoi >= 0.0 && dataset.p_aoi <= 1.0) || !(stream.p_aoi >= 0.0 && stream.p_aoi <= 1.0) ||
      !(online.p_aoi >= 0.0 && online.p_aoi <= 1.0)) {
    throw InvalidArgument("config: p_aoi values must be in [0, 1]");
  }
  if (frontend.sample_rate <= 0 || !(frontend.seconds > 0.0) || !audio::is_power_of_two(frontend.stft.frame_size) ||
      frontend.stft.hop == 0) {
    throw InvalidArgument("config: frontend needs positive rate and length, power-of-two frame_size, hop >= 1");
  }
  train_config().convnet.validate();
  energy.validate();
}

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  if (!root.is_object()) throw InvalidArgument("config: top level must be an object");
  RunConfig c;

  Section paths(root, "paths");
  paths.get_path("dataset_root", c.paths.dataset_root);
  paths.get_path("output_dir", c.paths.output_dir);

  Section ds(root, "dataset");
  ds.get("mode", c.dataset.mode);
  ds.get("n", c.dataset.n);
  ds.get("p_aoi", c.dataset.p_aoi);
  ds.get("seed", c.dataset.seed);
  ds.get("positive_class", c.dataset.positive_class);
  ds.get("train_folds", c.dataset.train_folds);
  ds.get("val_folds", c.dataset.val_folds);
  ds.get("test_folds", c.dataset.test_folds);
  ds.get("oversample_ratio", c.dataset.oversample_ratio);
  ds.get("oversample_seed", c.dataset.oversample_seed);

  Section fe(root, "frontend");
  fe.get("sample_rate", c.frontend.sample_rate);
  fe.get("seconds", c.frontend.seconds);
  fe.get("frame_size", c.frontend.stft.frame_size);
  fe.get("hop", c.frontend.stft.hop);

  Section cn(root, "convnet");
  cn.get("layers", c.convnet.layers);
  cn.get("channels", c.convnet.channels);
  cn.get("seed", c.convnet.seed);
  cn.get("epochs", c.convnet.epochs);
  cn.get("learning_rate", c.convnet.learning_rate);
  cn.get("momentum", c.convnet.momentum);
  cn.get("batch_size", c.convnet.batch_size);
  cn.get("shuffle_seed", c.convnet.shuffle_seed);

  Section hd(root, "hdc");
  hd.get("dim", c.hdc.dim);
  hd.get("alpha", c.hdc.alpha);
  hd.get("seed", c.hdc.seed);
  hd.get("encoder_gain", c.hdc.encoder_gain);
  hd.get("retrain_epochs", c.hdc.retrain_epochs);
  hd.get_mode("score_mode", c.hdc.score_mode);

  Section pl(root, "pipeline");
  pl.get("buffer_capacity", c.pipeline.buffer_capacity);
  const bool has_t = pl.has("t_score");
  const bool has_fpr = pl.has("target_fpr");
  if (has_t && has_fpr) throw InvalidArgument("config: set only one of pipeline.t_score and pipeline.target_fpr");
  if (has_t) c.pipeline.target_fpr.reset();
  pl.get("t_score", c.pipeline.t_score);
  pl.get("target_fpr", c.pipeline.target_fpr);
  pl.get("dedupe", c.pipeline.dedupe);
  pl.get("flush_on_transmit", c.pipeline.flush_on_transmit);

  Section en(root, "energy");
  en.get("e_edge", c.energy.e_edge);
  en.get("e_comm", c.energy.e_comm);
  en.get("e_cloud", c.energy.e_cloud);
  en.get("e_edge_comp", c.energy.e_edge_comp);
  en.get("compression_ratio", c.energy.compression_ratio);
  en.get("p_aoi", c.energy.p_aoi);
  en.get("accelerator_factor", c.energy.accelerator_factor);

  Section st(root, "stream");
  st.get("n", c.stream.n);
  st.get("p_aoi", c.stream.p_aoi);
  st.get("seed", c.stream.seed);

  Section sw(root, "sweep");
  sw.get("thresholds", c.sweep.thresholds);
  sw.get("t_min", c.sweep.t_min);
  sw.get("t_max", c.sweep.t_max);
  sw.get("layer_counts", c.sweep.layer_counts);
  sw.get("p_grid", c.sweep.p_grid);

  Section on(root, "online");
  on.get("n", c.online.n);
  on.get("p_aoi", c.online.p_aoi);
  on.get("seed", c.online.seed);
  on.get("drift_index", c.online.drift_index);
  on.get("centroid_hz", c.online.centroid_hz);
  on.get("drift_centroid_hz", c.online.drift_centroid_hz);
  on.get("feedback_period", c.online.feedback_period);
  on.get("feedback_budget", c.online.feedback_budget);
  on.get("window", c.online.window);
  on.get("alpha", c.online.alpha);
  on.get_mode("score_mode", c.online.score_mode);
  on.get("mlp_hidden", c.online.mlp_hidden);
  on.get("mlp_epochs", c.online.mlp_epochs);

  Section qz(root, "quantize");
  qz.get("calibration_samples", c.quantize.calibration_samples);

  for (const Section* s : {&paths, &ds, &fe, &cn, &hd, &pl, &en, &st, &sw, &on, &qz}) s->finish();
  static const std::set<std::string> kSections{"paths",  "dataset", "frontend", "convnet", "hdc",     "pipeline",
                                               "energy", "stream",  "sweep",    "online",  "quantize"};
  for (const auto& [key, value] : root.items()) {
    if (!kSections.contains(key)) throw InvalidArgument("config: unknown section " + key);
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string canonical_json(const RunConfig& c) {
  ordered_json j;
  j["dataset"] = {{"mode", c.dataset.mode},
                  {"n", c.dataset.n},
                  {"p_aoi", c.dataset.p_aoi},
                  {"seed", c.dataset.seed},
                  {"positive_class", c.dataset.positive_class},
                  {"train_folds", c.dataset.train_folds},
                  {"val_folds", c.dataset.val_folds},
                  {"test_folds", c.dataset.test_folds},
                  {"oversample_ratio", c.dataset.oversample_ratio},
                  {"oversample_seed", c.dataset.oversample_seed}};
  j["frontend"] = {{"sample_rate", c.frontend.sample_rate},
                   {"seconds", c.frontend.seconds},
                   {"frame_size", c.frontend.stft.frame_size},
                   {"hop", c.frontend.stft.hop}};
  j["convnet"] = {{"layers", c.convnet.layers},
                  {"channels", c.train_config().convnet.channels},
                  {"seed", c.convnet.seed},
                  {"epochs", c.convnet.epochs},
                  {"learning_rate", c.convnet.learning_rate},
                  {"momentum", c.convnet.momentum},
                  {"batch_size", c.convnet.batch_size},
                  {"shuffle_seed", c.convnet.shuffle_seed}};
  j["hdc"] = {{"dim", c.hdc.dim},
              {"alpha", c.hdc.alpha},
              {"seed", c.hdc.seed},
              {"encoder_gain", c.hdc.encoder_gain},
              {"retrain_epochs", c.hdc.retrain_epochs},
              {"score_mode", mode_name(c.hdc.score_mode)}};
  ordered_json pl = {{"buffer_capacity", c.pipeline.buffer_capacity}};
  if (c.pipeline.t_score) pl["t_score"] = *c.pipeline.t_score;
  if (c.pipeline.target_fpr) pl["target_fpr"] = *c.pipeline.target_fpr;
  pl["dedupe"] = c.pipeline.dedupe;
  pl["flush_on_transmit"] = c.pipeline.flush_on_transmit;
  j["pipeline"] = pl;
  j["energy"] = {{"e_edge", c.energy.e_edge},
                 {"e_comm", c.energy.e_comm},
                 {"e_cloud", c.energy.e_cloud},
                 {"e_edge_comp", c.energy.e_edge_comp},
                 {"compression_ratio", c.energy.compression_ratio},
                 {"p_aoi", c.energy.p_aoi},
                 {"accelerator_factor", c.energy.accelerator_factor}};
  j["stream"] = {{"n", c.stream.n}, {"p_aoi", c.stream.p_aoi}, {"seed", c.stream.seed}};
  j["sweep"] = {{"thresholds", c.sweep.thresholds},
                {"t_min", c.sweep.t_min},
                {"t_max", c.sweep.t_max},
                {"layer_counts", c.sweep.layer_counts},
                {"p_grid", c.sweep.p_grid}};
  j["online"] = {{"n", c.online.n},
                 {"p_aoi", c.online.p_aoi},
                 {"seed", c.online.seed},
                 {"drift_index", c.online.drift_index},
                 {"centroid_hz", c.online.centroid_hz},
                 {"drift_centroid_hz", c.online.drift_centroid_hz},
                 {"feedback_period", c.online.feedback_period},
                 {"feedback_budget", c.online.feedback_budget},
                 {"window", c.online.window},
                 {"alpha", c.online.alpha},
                 {"score_mode", mode_name(c.online.score_mode)},
                 {"mlp_hidden", c.online.mlp_hidden},
                 {"mlp_epochs", c.online.mlp_epochs}};
  j["quantize"] = {{"calibration_samples", c.quantize.calibration_samples}};
  return j.dump();
}

std::string config_hash(const RunConfig& config) { return io::hex64(io::fnv1a64(canonical_json(config))); }

}  // namespace hisense::cli
