#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gdnet/sar_image.hpp"

namespace gdnet {

struct FcmOptions {
  std::size_t clusters = 3;
  double fuzziness = 2.0;
  double tol = 1e-5;
  std::size_t max_iter = 100;
};

struct FcmResult {
  std::vector<double> centers;             // ascending after the final sort
  std::vector<double> memberships;         // flat N * clusters, rows sum to 1
  std::vector<double> objective_history;   // non-increasing
  std::size_t clusters = 0;
};

// Standard FCM alternating updates. Initialization is deterministic: centers
// at quantiles {1/6, 3/6, 5/6} of the value distribution. Fewer than
// `clusters` distinct values is a degenerate_input_error.
FcmResult fcm_cluster(const std::vector<float>& values,
                      const FcmOptions& options = {});

enum class PixelLabel : std::uint8_t {
  kUnchanged = 0,
  kIntermediate = 1,
  kChanged = 2,
};

struct PseudoLabelMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<PixelLabel> labels;
  std::array<std::size_t, 3> counts{};  // indexed by PixelLabel

  PixelLabel at(std::size_t row, std::size_t col) const {
    return labels[row * width + col];
  }
};

// Hard-assigns each pixel to its max-membership cluster (ties toward the
// lower center); lowest center -> UNCHANGED, middle -> INTERMEDIATE,
// highest -> CHANGED.
PseudoLabelMap assign_labels(const DifferenceImage& di, const FcmResult& fcm);

// 8-bit PGM export: 0 = UNCHANGED, 128 = INTERMEDIATE, 255 = CHANGED.
void write_label_map(const PseudoLabelMap& map, const std::string& path);

struct Sample {
  std::size_t row = 0;
  std::size_t col = 0;
  std::uint8_t label = 0;  // 0 = unchanged, 1 = changed
};

struct SampleSet {
  std::vector<Sample> samples;
  std::uint64_t seed = 0;
};

// Balanced draw without replacement from CHANGED and UNCHANGED, capped per
// class; INTERMEDIATE is never selected. Each class needs at least 10 pixels.
SampleSet select_samples(const PseudoLabelMap& labels,
                         std::size_t per_class_cap, std::uint64_t seed);

}  // namespace gdnet
