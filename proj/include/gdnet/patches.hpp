#pragma once

#include <cstdint>
#include <vector>

#include "gdnet/preclassify.hpp"
#include "gdnet/sar_image.hpp"
#include "gdnet/tensor.hpp"

namespace gdnet {

// Symmetric reflection with edge repetition: index -1 maps to 0, -2 to 1;
// index H maps to H-1, H+1 to H-2. Margin must not exceed min(width, height).
std::vector<float> mirror_pad(const std::vector<float>& grid, std::size_t width,
                              std::size_t height, std::size_t margin);

// The three mirror-padded channels (t1, t2, di) a patch is read from; built
// once per scene with margin ceil(r/2).
struct PaddedScene {
  std::size_t width = 0;   // original dimensions
  std::size_t height = 0;
  std::size_t margin = 0;
  std::vector<float> t1;
  std::vector<float> t2;
  std::vector<float> di;

  static PaddedScene build(const SarImagePair& pair, const DifferenceImage& di,
                           std::size_t r);
};

// 3*r*r window centered on (row, col): (r-1)/2 rows before, the rest after.
// Channels stacked in order (t1, t2, di).
Tensor extract_patch(const PaddedScene& scene, std::size_t row,
                     std::size_t col, std::size_t r);

// Same extraction written straight into `dst` (a row of a batch tensor).
void extract_patch_into(const PaddedScene& scene, std::size_t row,
                        std::size_t col, std::size_t r, float* dst);

struct PatchBatch {
  Tensor inputs;  // B*3*r*r
  Tensor labels;  // B*2, rows sum to 1
  std::vector<std::pair<std::size_t, std::size_t>> coords;
};

// One epoch of minibatches: samples shuffled by epoch_seed, one-hot labels,
// final partial batch retained.
std::vector<PatchBatch> make_minibatches(const SampleSet& samples,
                                         const PaddedScene& scene,
                                         std::size_t r, std::size_t batch_size,
                                         std::uint64_t epoch_seed);

}  // namespace gdnet
