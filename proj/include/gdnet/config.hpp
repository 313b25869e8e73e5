#pragma once

#include <cstdint>
#include <string>

#include "gdnet/model.hpp"
#include "gdnet/train.hpp"

namespace gdnet {

// Fully resolved run configuration. File format is flat `key = value` lines
// (a TOML-compatible subset); command-line flags override file values.
struct PipelineConfig {
  std::string t1_path;
  std::string t2_path;
  std::string ground_truth_path;  // optional
  std::string output_dir = ".";

  std::size_t r = 12;
  std::size_t h1 = 16;
  std::size_t h2 = 32;
  std::size_t h3 = 6;
  std::size_t m = 4;
  std::size_t k = 3;
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  MixupMode mixup_mode = MixupMode::kTwoStage;
  double alpha = 1.0;
  ConvMode conv_mode = ConvMode::kGdconv;
  std::size_t per_class_cap = 8000;
  std::uint64_t seed = 42;

  ModelConfig model_config() const {
    return ModelConfig{r, h1, h2, h3, m, k, conv_mode};
  }
  TrainConfig train_config() const {
    TrainConfig t;
    t.epochs = epochs;
    t.batch_size = batch_size;
    t.learning_rate = static_cast<float>(learning_rate);
    t.mixup_mode = mixup_mode;
    t.alpha = alpha;
    t.seed = seed;
    return t;
  }
};

// Applies one `key = value` assignment; unknown keys and type mismatches are
// config_errors naming the offending key.
void apply_config_entry(PipelineConfig& config, const std::string& key,
                        const std::string& value);

PipelineConfig parse_config_file(const std::string& path);

void validate_config(const PipelineConfig& config);

// The fully resolved config in file format (round-trips through the parser).
std::string config_to_string(const PipelineConfig& config);

std::string mixup_mode_name(MixupMode mode);
std::string conv_mode_name(ConvMode mode);

}  // namespace gdnet
