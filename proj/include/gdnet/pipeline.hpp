#pragma once

#include <optional>
#include <string>

#include "gdnet/config.hpp"
#include "gdnet/eval.hpp"
#include "gdnet/model_io.hpp"
#include "gdnet/preclassify.hpp"
#include "gdnet/sar_image.hpp"
#include "gdnet/train.hpp"

namespace gdnet {

// Loaded pair plus the derived difference image and padded channels.
struct SceneData {
  SarImagePair pair;
  DifferenceImage di;
  PaddedScene scene;
};

SceneData load_scene(const PipelineConfig& config);
SceneData scene_from_pair(SarImagePair pair, std::size_t r);

// FCM over the difference image, label assignment, balanced sample draw.
SampleSet preclassify_scene(const SceneData& data, const PipelineConfig& config,
                            PseudoLabelMap* labels_out = nullptr);

// Subcommand bodies. Every one writes the fully resolved config to
// <output_dir>/config_resolved.txt so results are reproducible from logs.
void run_preclassify(const PipelineConfig& config);
void run_train(const PipelineConfig& config);
void run_predict(const PipelineConfig& config, const std::string& checkpoint);
MetricsReport run_eval(const PipelineConfig& config,
                       const std::string& prediction_path);
std::optional<MetricsReport> run_pipeline(const PipelineConfig& config);
void run_synth(const PipelineConfig& config, const SynthConfig& synth);
void run_summary(const PipelineConfig& config, std::ostream& out);
void run_dump_features(const PipelineConfig& config,
                       const std::string& checkpoint, FeatureStage stage);

// Default artifact locations under output_dir.
std::string checkpoint_path(const PipelineConfig& config);
std::string change_map_path(const PipelineConfig& config);
std::string report_path(const PipelineConfig& config);

}  // namespace gdnet
