#include "gdnet/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "gdnet/errors.hpp"
#include "gdnet/patches.hpp"

namespace gdnet {

namespace {

namespace fs = std::filesystem;

std::string join(const PipelineConfig& config, const std::string& name) {
  return (fs::path(config.output_dir) / name).string();
}

void log_resolved_config(const PipelineConfig& config) {
  fs::create_directories(config.output_dir);
  std::ofstream out(join(config, "config_resolved.txt"));
  if (!out) {
    throw io_error("cannot write resolved config in " + config.output_dir);
  }
  out << config_to_string(config);
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) {
    throw config_error(std::string("missing required path: ") + what);
  }
  if (!fs::exists(path)) {
    throw io_error(std::string(what) + " not found: " + path);
  }
}

}  // namespace

std::string checkpoint_path(const PipelineConfig& config) {
  return join(config, "model.gdnt");
}
std::string change_map_path(const PipelineConfig& config) {
  return join(config, "change_map.pgm");
}
std::string report_path(const PipelineConfig& config) {
  return join(config, "report.txt");
}

SceneData scene_from_pair(SarImagePair pair, std::size_t r) {
  SceneData data;
  data.pair = std::move(pair);
  data.di = log_ratio_di(data.pair);
  data.scene = PaddedScene::build(data.pair, data.di, r);
  return data;
}

SceneData load_scene(const PipelineConfig& config) {
  require_file(config.t1_path, "t1 image");
  require_file(config.t2_path, "t2 image");
  SarImagePair pair;
  pair.t1 = load_image(config.t1_path);
  pair.t2 = load_image(config.t2_path);
  if (pair.t1.width != pair.t2.width || pair.t1.height != pair.t2.height) {
    throw dimension_error("t1/t2 dimensions differ");
  }
  return scene_from_pair(std::move(pair), config.r);
}

SampleSet preclassify_scene(const SceneData& data, const PipelineConfig& config,
                            PseudoLabelMap* labels_out) {
  FcmResult fcm = fcm_cluster(data.di.pixels);
  PseudoLabelMap labels = assign_labels(data.di, fcm);
  SampleSet samples = select_samples(labels, config.per_class_cap, config.seed);
  if (labels_out) *labels_out = std::move(labels);
  return samples;
}

void run_preclassify(const PipelineConfig& config) {
  validate_config(config);
  log_resolved_config(config);
  SceneData data = load_scene(config);
  PseudoLabelMap labels;
  preclassify_scene(data, config, &labels);
  write_label_map(labels, join(config, "pseudo_labels.pgm"));
}

void run_train(const PipelineConfig& config) {
  validate_config(config);
  log_resolved_config(config);
  SceneData data = load_scene(config);
  PseudoLabelMap labels;
  SampleSet samples = preclassify_scene(data, config, &labels);
  write_label_map(labels, join(config, "pseudo_labels.pgm"));

  GDNet<float> model = init_model<float>(config.model_config(), config.seed);
  TrainRecord record = train_model(model, samples, data.scene,
                                   config.train_config());
  write_train_log(record, join(config, "train_log.csv"));
  save_checkpoint(model, checkpoint_path(config));
}

void run_predict(const PipelineConfig& config, const std::string& checkpoint) {
  validate_config(config);
  log_resolved_config(config);
  require_file(checkpoint, "checkpoint");
  SceneData data = load_scene(config);
  GDNet<float> model = load_checkpoint(checkpoint);
  if (model.config.r != config.r) {
    throw config_error("checkpoint r does not match configured r");
  }
  ChangeMap map = predict_map(model, data.scene);
  write_change_map(map, change_map_path(config));
}

MetricsReport run_eval(const PipelineConfig& config,
                       const std::string& prediction_path) {
  validate_config(config);
  log_resolved_config(config);
  require_file(prediction_path, "prediction map");
  require_file(config.ground_truth_path, "ground truth map");
  const ChangeMap pred = read_change_map(prediction_path);
  const ChangeMap gt = read_change_map(config.ground_truth_path);
  const ConfusionCounts c = confusion_counts(pred, gt);
  const MetricsReport report = compute_metrics(c.tp, c.tn, c.fp, c.fn);
  write_report(report, report_path(config));
  return report;
}

std::optional<MetricsReport> run_pipeline(const PipelineConfig& config) {
  validate_config(config);
  log_resolved_config(config);
  SceneData data = load_scene(config);
  PseudoLabelMap labels;
  SampleSet samples = preclassify_scene(data, config, &labels);
  write_label_map(labels, join(config, "pseudo_labels.pgm"));

  GDNet<float> model = init_model<float>(config.model_config(), config.seed);
  TrainRecord record = train_model(model, samples, data.scene,
                                   config.train_config());
  write_train_log(record, join(config, "train_log.csv"));
  save_checkpoint(model, checkpoint_path(config));

  ChangeMap map = predict_map(model, data.scene);
  write_change_map(map, change_map_path(config));

  if (config.ground_truth_path.empty()) return std::nullopt;
  require_file(config.ground_truth_path, "ground truth map");
  const ChangeMap gt = read_change_map(config.ground_truth_path);
  const ConfusionCounts c = confusion_counts(map, gt);
  const MetricsReport report = compute_metrics(c.tp, c.tn, c.fp, c.fn);
  write_report(report, report_path(config));
  return report;
}

void run_synth(const PipelineConfig& config, const SynthConfig& synth) {
  log_resolved_config(config);
  SynthScene scene = synth_scene(synth);
  save_image(scene.pair.t1, join(config, "t1.pgm"));
  save_image(scene.pair.t2, join(config, "t2.pgm"));
  write_change_map(scene.ground_truth, join(config, "ground_truth.pgm"));
}

void run_summary(const PipelineConfig& config, std::ostream& out) {
  validate_config(config);
  log_resolved_config(config);
  GDNet<float> model = init_model<float>(config.model_config(), config.seed);
  const ModelSummary s = model_summary(model);
  out << "parameters: " << s.param_count << "\n";
  out << "flops_per_sample: " << s.flops_per_sample << "\n";
  out << "feature_width: " << model.config.feature_width() << "\n";
  out << "counting_convention: " << s.convention << "\n";
}

void run_dump_features(const PipelineConfig& config,
                       const std::string& checkpoint, FeatureStage stage) {
  validate_config(config);
  log_resolved_config(config);
  require_file(checkpoint, "checkpoint");
  SceneData data = load_scene(config);
  SampleSet samples = preclassify_scene(data, config);
  GDNet<float> model = load_checkpoint(checkpoint);
  dump_features(model, samples, data.scene, stage,
                join(config, "features.csv"));
}

}  // namespace gdnet
