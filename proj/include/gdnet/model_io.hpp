#pragma once

#include <string>

#include "gdnet/model.hpp"
#include "gdnet/patches.hpp"
#include "gdnet/preclassify.hpp"

namespace gdnet {

// Checkpoint layout: magic "GDNT", u32 version, u32 header length, UTF-8
// header (config line plus one "tensor <name> <dims...>" line per parameter in
// fixed order), then raw little-endian float32 payloads in header order.
void save_checkpoint(GDNet<float>& model, const std::string& path);
GDNet<float> load_checkpoint(const std::string& path);

enum class FeatureStage { kBeforeLast, kAfterLast };

// One CSV row per sample: row, col, label, then the flattened feature at the
// requested stage (input to the last GDConv, or its flattened output).
void dump_features(GDNet<float>& model, const SampleSet& samples,
                   const PaddedScene& scene, FeatureStage stage,
                   const std::string& path);

}  // namespace gdnet
