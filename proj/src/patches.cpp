#include "gdnet/patches.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "gdnet/errors.hpp"

namespace gdnet {

namespace {

std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
  if (i < 0) return static_cast<std::size_t>(-1 - i);
  if (i >= static_cast<std::ptrdiff_t>(n)) {
    return static_cast<std::size_t>(2 * static_cast<std::ptrdiff_t>(n) - 1 - i);
  }
  return static_cast<std::size_t>(i);
}

}  // namespace

std::vector<float> mirror_pad(const std::vector<float>& grid, std::size_t width,
                              std::size_t height, std::size_t margin) {
  if (grid.size() != width * height) {
    throw dimension_error("mirror_pad: grid size mismatch");
  }
  if (margin > std::min(width, height)) {
    throw config_error("mirror_pad: margin exceeds image dimensions");
  }
  const std::size_t pw = width + 2 * margin, ph = height + 2 * margin;
  std::vector<float> out(pw * ph);
  const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(margin);
  for (std::size_t r = 0; r < ph; ++r) {
    const std::size_t sr = reflect(static_cast<std::ptrdiff_t>(r) - m, height);
    for (std::size_t c = 0; c < pw; ++c) {
      const std::size_t sc = reflect(static_cast<std::ptrdiff_t>(c) - m, width);
      out[r * pw + c] = grid[sr * width + sc];
    }
  }
  return out;
}

PaddedScene PaddedScene::build(const SarImagePair& pair,
                               const DifferenceImage& di, std::size_t r) {
  if (pair.t1.width != di.width || pair.t1.height != di.height) {
    throw dimension_error("PaddedScene: pair/di dimensions differ");
  }
  const std::size_t margin = (r + 1) / 2;
  PaddedScene scene;
  scene.width = di.width;
  scene.height = di.height;
  scene.margin = margin;
  scene.t1 = mirror_pad(pair.t1.pixels, di.width, di.height, margin);
  scene.t2 = mirror_pad(pair.t2.pixels, di.width, di.height, margin);
  scene.di = mirror_pad(di.pixels, di.width, di.height, margin);
  return scene;
}

void extract_patch_into(const PaddedScene& scene, std::size_t row,
                        std::size_t col, std::size_t r, float* dst) {
  if (row >= scene.height || col >= scene.width) {
    throw dimension_error("extract_patch: pixel out of bounds");
  }
  const std::size_t pw = scene.width + 2 * scene.margin;
  const std::size_t before = (r - 1) / 2;
  // Top-left corner in padded coordinates; margin >= before by construction.
  const std::size_t r0 = row + scene.margin - before;
  const std::size_t c0 = col + scene.margin - before;
  const std::vector<float>* channels[3] = {&scene.t1, &scene.t2, &scene.di};
  for (std::size_t ch = 0; ch < 3; ++ch) {
    const float* src = channels[ch]->data();
    for (std::size_t y = 0; y < r; ++y) {
      const float* srow = src + (r0 + y) * pw + c0;
      std::copy(srow, srow + r, dst);
      dst += r;
    }
  }
}

Tensor extract_patch(const PaddedScene& scene, std::size_t row,
                     std::size_t col, std::size_t r) {
  Tensor patch({3, r, r});
  extract_patch_into(scene, row, col, r, patch.data());
  return patch;
}

std::vector<PatchBatch> make_minibatches(const SampleSet& samples,
                                         const PaddedScene& scene,
                                         std::size_t r, std::size_t batch_size,
                                         std::uint64_t epoch_seed) {
  if (samples.samples.empty()) {
    throw config_error("make_minibatches: empty sample set");
  }
  if (batch_size < 2) {
    throw config_error("make_minibatches: batch size must be >= 2");
  }
  std::vector<std::size_t> order(samples.samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(epoch_seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<PatchBatch> batches;
  const std::size_t total = order.size();
  for (std::size_t start = 0; start < total; start += batch_size) {
    const std::size_t b = std::min(batch_size, total - start);
    PatchBatch batch;
    batch.inputs = Tensor({b, 3, r, r});
    batch.labels = Tensor({b, 2});
    batch.coords.reserve(b);
    for (std::size_t i = 0; i < b; ++i) {
      const Sample& s = samples.samples[order[start + i]];
      extract_patch_into(scene, s.row, s.col, r,
                         batch.inputs.data() + i * 3 * r * r);
      batch.labels.at2(i, 0) = s.label == 0 ? 1.0f : 0.0f;
      batch.labels.at2(i, 1) = s.label == 1 ? 1.0f : 0.0f;
      batch.coords.emplace_back(s.row, s.col);
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

}  // namespace gdnet
