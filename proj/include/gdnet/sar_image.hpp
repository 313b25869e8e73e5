#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gdnet/errors.hpp"

namespace gdnet {

// Grayscale SAR epoch, min-max normalized to [0,1] on load. source_max keeps
// the original maximum raw value for provenance.
struct SarImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<float> pixels;  // row-major, height*width
  double source_max = 0.0;

  float at(std::size_t row, std::size_t col) const {
    return pixels[row * width + col];
  }
};

struct SarImagePair {
  SarImage t1;
  SarImage t2;
};

// Normalized absolute log-ratio grid, same dimensions as the pair.
struct DifferenceImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<float> pixels;

  float at(std::size_t row, std::size_t col) const {
    return pixels[row * width + col];
  }
};

// Binary per-pixel decision: 0 = unchanged, 1 = changed.
struct ChangeMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> cells;

  std::uint8_t at(std::size_t row, std::size_t col) const {
    return cells[row * width + col];
  }
};

// (x - min) / (max - min); a constant grid maps to all zeros.
std::vector<float> min_max_normalize(const std::vector<double>& raw);

// PGM P5/P2 reader, maxval up to 65535. Color or other magic numbers are
// rejected with format_error.
SarImage load_image(const std::string& path);

// 8-bit P5 writer, values quantized as round(v * 255).
void save_image(const SarImage& image, const std::string& path);

// Per pixel |log((t2+eps)/(t1+eps))| with eps = 1e-6, then min-max normalized.
DifferenceImage log_ratio_di(const SarImagePair& pair);

// Change maps as 8-bit P5 with 0 = unchanged, 255 = changed; any other pixel
// value on read is a format_error.
void write_change_map(const ChangeMap& map, const std::string& path);
ChangeMap read_change_map(const std::string& path);

struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t width = 256;
  std::size_t height = 256;
  double change_fraction_target = 0.1;
  double looks = 4.0;  // gamma speckle shape L, mean 1
};

struct SynthScene {
  SarImagePair pair;
  ChangeMap ground_truth;
};

// Multiplies a reflectance grid by independent gamma(L, 1/L) speckle. Returned
// intensities are raw (pre-clip).
std::vector<double> apply_speckle(const std::vector<double>& reflectance,
                                  double looks, std::mt19937_64& rng);

// Piecewise-constant reflectance scene with injected change regions and L-look
// multiplicative speckle; fully determined by the seed.
SynthScene synth_scene(const SynthConfig& config);

}  // namespace gdnet
