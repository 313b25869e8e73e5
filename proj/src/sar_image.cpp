#include "gdnet/sar_image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace gdnet {

namespace {

// Skips whitespace and '#' comment lines between PGM header tokens.
std::string next_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (!std::isspace(ch)) {
      tok.push_back(static_cast<char>(ch));
      break;
    }
  }
  while ((ch = in.get()) != EOF && !std::isspace(ch) && ch != '#') {
    tok.push_back(static_cast<char>(ch));
  }
  if (ch == '#') in.unget();
  return tok;
}

std::size_t parse_dim(const std::string& tok, const char* what) {
  if (tok.empty()) throw format_error(std::string("pgm: missing ") + what);
  std::size_t pos = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(tok, &pos);
  } catch (const std::exception&) {
    throw format_error(std::string("pgm: bad ") + what + " '" + tok + "'");
  }
  if (pos != tok.size() || v == 0) {
    throw format_error(std::string("pgm: bad ") + what + " '" + tok + "'");
  }
  return v;
}

}  // namespace

std::vector<float> min_max_normalize(const std::vector<double>& raw) {
  if (raw.empty()) throw dimension_error("min_max_normalize: empty grid");
  const auto [mn_it, mx_it] = std::minmax_element(raw.begin(), raw.end());
  const double mn = *mn_it, mx = *mx_it;
  std::vector<float> out(raw.size(), 0.0f);
  if (mx > mn) {
    const double inv = 1.0 / (mx - mn);
    for (std::size_t i = 0; i < raw.size(); ++i) {
      out[i] = static_cast<float>((raw[i] - mn) * inv);
    }
  }
  return out;
}

SarImage load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open image: " + path);

  const std::string magic = next_token(in);
  if (magic != "P5" && magic != "P2") {
    throw format_error("unsupported image magic '" + magic + "' in " + path +
                       " (expected grayscale PGM P5/P2)");
  }
  const std::size_t width = parse_dim(next_token(in), "width");
  const std::size_t height = parse_dim(next_token(in), "height");
  const std::size_t maxval = parse_dim(next_token(in), "maxval");
  if (maxval > 65535) {
    throw format_error("pgm maxval exceeds 65535 in " + path);
  }

  const std::size_t count = width * height;
  std::vector<double> raw(count);
  if (magic == "P5") {
    if (maxval < 256) {
      std::vector<std::uint8_t> buf(count);
      in.read(reinterpret_cast<char*>(buf.data()),
              static_cast<std::streamsize>(count));
      if (static_cast<std::size_t>(in.gcount()) != count) {
        throw format_error("truncated pgm payload in " + path);
      }
      for (std::size_t i = 0; i < count; ++i) raw[i] = buf[i];
    } else {
      // 16-bit P5 samples are big-endian.
      std::vector<std::uint8_t> buf(count * 2);
      in.read(reinterpret_cast<char*>(buf.data()),
              static_cast<std::streamsize>(count * 2));
      if (static_cast<std::size_t>(in.gcount()) != count * 2) {
        throw format_error("truncated pgm payload in " + path);
      }
      for (std::size_t i = 0; i < count; ++i) {
        raw[i] = buf[2 * i] * 256.0 + buf[2 * i + 1];
      }
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const std::string tok = next_token(in);
      if (tok.empty()) throw format_error("truncated pgm payload in " + path);
      std::size_t pos = 0;
      unsigned long v = 0;
      try {
        v = std::stoul(tok, &pos);
      } catch (const std::exception&) {
        throw format_error("pgm: bad pixel '" + tok + "' in " + path);
      }
      if (pos != tok.size() || v > maxval) {
        throw format_error("pgm: bad pixel '" + tok + "' in " + path);
      }
      raw[i] = static_cast<double>(v);
    }
  }

  SarImage img;
  img.width = width;
  img.height = height;
  img.source_max = *std::max_element(raw.begin(), raw.end());
  img.pixels = min_max_normalize(raw);
  return img;
}

void save_image(const SarImage& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write image: " + path);
  out << "P5\n" << image.width << " " << image.height << "\n255\n";
  for (float v : image.pixels) {
    const int q = static_cast<int>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
    out.put(static_cast<char>(q));
  }
  if (!out) throw io_error("write failed: " + path);
}

DifferenceImage log_ratio_di(const SarImagePair& pair) {
  if (pair.t1.width != pair.t2.width || pair.t1.height != pair.t2.height) {
    throw dimension_error("log_ratio_di: epoch dimensions differ");
  }
  constexpr double kEps = 1e-6;
  const std::size_t count = pair.t1.pixels.size();
  std::vector<double> raw(count);
  for (std::size_t i = 0; i < count; ++i) {
    raw[i] = std::abs(std::log((pair.t2.pixels[i] + kEps) /
                               (pair.t1.pixels[i] + kEps)));
  }
  DifferenceImage di;
  di.width = pair.t1.width;
  di.height = pair.t1.height;
  di.pixels = min_max_normalize(raw);
  return di;
}

void write_change_map(const ChangeMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write change map: " + path);
  out << "P5\n" << map.width << " " << map.height << "\n255\n";
  for (std::uint8_t c : map.cells) {
    out.put(c ? static_cast<char>(255) : static_cast<char>(0));
  }
  if (!out) throw io_error("write failed: " + path);
}

ChangeMap read_change_map(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open change map: " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw format_error("change map must be binary P5: " + path);
  std::size_t w = 0, h = 0, maxval = 0;
  in >> w >> h >> maxval;
  if (!in || w == 0 || h == 0) {
    throw format_error("bad change map header: " + path);
  }
  if (maxval != 255) throw format_error("change map maxval must be 255: " + path);
  in.get();  // single whitespace after maxval
  ChangeMap map;
  map.width = w;
  map.height = h;
  map.cells.resize(w * h);
  for (std::size_t i = 0; i < map.cells.size(); ++i) {
    const int ch = in.get();
    if (ch == EOF) throw format_error("truncated change map: " + path);
    if (ch == 0) {
      map.cells[i] = 0;
    } else if (ch == 255) {
      map.cells[i] = 1;
    } else {
      throw format_error("change map pixel not in {0,255}: " + path);
    }
  }
  return map;
}

std::vector<double> apply_speckle(const std::vector<double>& reflectance,
                                  double looks, std::mt19937_64& rng) {
  std::gamma_distribution<double> gamma(looks, 1.0 / looks);
  std::vector<double> out(reflectance.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = reflectance[i] * gamma(rng);
  }
  return out;
}

namespace {

struct Ellipse {
  double cy, cx, ry, rx;

  bool contains(std::size_t row, std::size_t col) const {
    const double dy = (static_cast<double>(row) - cy) / ry;
    const double dx = (static_cast<double>(col) - cx) / rx;
    return dy * dy + dx * dx <= 1.0;
  }
};

void paint_ellipse(std::vector<double>& grid, std::size_t w, std::size_t h,
                   const Ellipse& e, double value) {
  const std::size_t r0 = static_cast<std::size_t>(
      std::max(0.0, std::floor(e.cy - e.ry)));
  const std::size_t r1 = static_cast<std::size_t>(
      std::min<double>(static_cast<double>(h) - 1, std::ceil(e.cy + e.ry)));
  const std::size_t c0 = static_cast<std::size_t>(
      std::max(0.0, std::floor(e.cx - e.rx)));
  const std::size_t c1 = static_cast<std::size_t>(
      std::min<double>(static_cast<double>(w) - 1, std::ceil(e.cx + e.rx)));
  for (std::size_t r = r0; r <= r1; ++r) {
    for (std::size_t c = c0; c <= c1; ++c) {
      if (e.contains(r, c)) grid[r * w + c] = value;
    }
  }
}

}  // namespace

SynthScene synth_scene(const SynthConfig& config) {
  if (config.width < 64 || config.height < 64) {
    throw config_error("synth_scene: dimensions must be >= 64");
  }
  if (config.change_fraction_target <= 0.0 ||
      config.change_fraction_target >= 0.5) {
    throw config_error("synth_scene: change fraction must be in (0, 0.5)");
  }
  if (config.looks < 1.0) {
    throw config_error("synth_scene: looks must be >= 1");
  }

  const std::size_t w = config.width, h = config.height;
  const std::size_t count = w * h;
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Static background structure shared by both epochs. The scene is kept
  // bright so that the unit clip soaks up the upper speckle tail in both
  // epochs: saturated pixels agree exactly across epochs, which keeps the
  // per-pixel log-ratio of unchanged areas tight. The injected changes are
  // dark, so the change contrast stays far above the residual speckle spread.
  std::vector<double> refl1(count, 0.90);
  const int n_objects = 5 + static_cast<int>(rng() % 5);
  for (int i = 0; i < n_objects; ++i) {
    Ellipse e;
    e.cy = unit(rng) * static_cast<double>(h);
    e.cx = unit(rng) * static_cast<double>(w);
    e.ry = 6.0 + unit(rng) * 0.12 * static_cast<double>(h);
    e.rx = 6.0 + unit(rng) * 0.12 * static_cast<double>(w);
    paint_ellipse(refl1, w, h, e, 0.65 + unit(rng) * 0.35);
  }

  // Grow the change mask by unioning small ellipses until the target fraction
  // is reached; small areas bound the overshoot.
  std::vector<std::uint8_t> mask(count, 0);
  const double max_radius =
      std::max(5.0, 0.06 * static_cast<double>(std::min(w, h)));
  std::size_t changed = 0;
  const std::size_t want =
      static_cast<std::size_t>(config.change_fraction_target *
                               static_cast<double>(count));
  int attempts = 0;
  while (changed < want) {
    if (++attempts > 100000) {
      throw generation_error("synth_scene: could not reach change fraction");
    }
    Ellipse e;
    e.cy = unit(rng) * static_cast<double>(h);
    e.cx = unit(rng) * static_cast<double>(w);
    e.ry = 4.0 + unit(rng) * (max_radius - 4.0);
    e.rx = 4.0 + unit(rng) * (max_radius - 4.0);
    const std::size_t r0 = static_cast<std::size_t>(
        std::max(0.0, std::floor(e.cy - e.ry)));
    const std::size_t r1 = static_cast<std::size_t>(
        std::min<double>(static_cast<double>(h) - 1, std::ceil(e.cy + e.ry)));
    const std::size_t c0 = static_cast<std::size_t>(
        std::max(0.0, std::floor(e.cx - e.rx)));
    const std::size_t c1 = static_cast<std::size_t>(
        std::min<double>(static_cast<double>(w) - 1, std::ceil(e.cx + e.rx)));
    for (std::size_t r = r0; r <= r1; ++r) {
      for (std::size_t c = c0; c <= c1; ++c) {
        if (e.contains(r, c) && !mask[r * w + c]) {
          mask[r * w + c] = 1;
          ++changed;
        }
      }
    }
  }

  std::vector<double> refl2 = refl1;
  for (std::size_t i = 0; i < count; ++i) {
    if (mask[i]) refl2[i] = 0.010 + unit(rng) * 0.015;
  }

  std::vector<double> i1 = apply_speckle(refl1, config.looks, rng);
  std::vector<double> i2 = apply_speckle(refl2, config.looks, rng);
  for (std::size_t i = 0; i < count; ++i) {
    i1[i] = std::clamp(i1[i], 0.0, 1.0);
    i2[i] = std::clamp(i2[i], 0.0, 1.0);
  }

  SynthScene scene;
  scene.pair.t1.width = scene.pair.t2.width = w;
  scene.pair.t1.height = scene.pair.t2.height = h;
  scene.pair.t1.source_max = *std::max_element(i1.begin(), i1.end());
  scene.pair.t2.source_max = *std::max_element(i2.begin(), i2.end());
  scene.pair.t1.pixels = min_max_normalize(i1);
  scene.pair.t2.pixels = min_max_normalize(i2);
  scene.ground_truth.width = w;
  scene.ground_truth.height = h;
  scene.ground_truth.cells = std::move(mask);
  return scene;
}

}  // namespace gdnet
