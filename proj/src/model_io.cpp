#include "gdnet/model_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "gdnet/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads are little-endian");

namespace gdnet {

namespace {

constexpr char kMagic[4] = {'G', 'D', 'N', 'T'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t read_u32(std::istream& in, const std::string& path) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  if (in.gcount() != 4) throw format_error("truncated checkpoint: " + path);
  return v;
}

std::string conv_mode_name(ConvMode m) {
  return m == ConvMode::kGdconv ? "gdconv" : "static";
}

}  // namespace

void save_checkpoint(GDNet<float>& model, const std::string& path) {
  std::ostringstream header;
  const ModelConfig& c = model.config;
  header << "config r=" << c.r << " h1=" << c.h1 << " h2=" << c.h2
         << " h3=" << c.h3 << " m=" << c.m << " k=" << c.k
         << " conv_mode=" << conv_mode_name(c.conv_mode) << "\n";
  std::vector<const Tensor*> payload;
  model.for_each_param([&](const char* name, GradSlot<float>& slot) {
    header << "tensor " << name;
    for (std::size_t d : slot.value.shape()) header << " " << d;
    header << "\n";
    payload.push_back(&slot.value);
  });
  const std::string htext = header.str();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write checkpoint: " + path);
  out.write(kMagic, 4);
  write_u32(out, kVersion);
  write_u32(out, static_cast<std::uint32_t>(htext.size()));
  out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
  for (const Tensor* t : payload) {
    out.write(reinterpret_cast<const char*>(t->data()),
              static_cast<std::streamsize>(t->size() * sizeof(float)));
  }
  if (!out) throw io_error("checkpoint write failed: " + path);
}

GDNet<float> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0) {
    throw format_error("bad checkpoint magic in " + path);
  }
  const std::uint32_t version = read_u32(in, path);
  if (version != kVersion) {
    throw format_error("unknown checkpoint version " + std::to_string(version) +
                       " in " + path);
  }
  const std::uint32_t hlen = read_u32(in, path);
  std::string htext(hlen, '\0');
  in.read(htext.data(), hlen);
  if (static_cast<std::uint32_t>(in.gcount()) != hlen) {
    throw format_error("truncated checkpoint header: " + path);
  }

  std::istringstream header(htext);
  std::string cfgline;
  std::getline(header, cfgline);
  std::istringstream cfgstream(cfgline);
  std::string kind;
  cfgstream >> kind;
  if (kind != "config") throw format_error("checkpoint missing config: " + path);
  ModelConfig cfg;
  std::string field;
  while (cfgstream >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) {
      throw format_error("bad checkpoint config field '" + field + "'");
    }
    const std::string key = field.substr(0, eq);
    const std::string val = field.substr(eq + 1);
    if (key == "conv_mode") {
      if (val == "gdconv") {
        cfg.conv_mode = ConvMode::kGdconv;
      } else if (val == "static") {
        cfg.conv_mode = ConvMode::kStatic;
      } else {
        throw format_error("bad conv_mode '" + val + "' in " + path);
      }
      continue;
    }
    std::size_t num = 0;
    try {
      num = std::stoul(val);
    } catch (const std::exception&) {
      throw format_error("bad checkpoint config value '" + field + "'");
    }
    if (key == "r") cfg.r = num;
    else if (key == "h1") cfg.h1 = num;
    else if (key == "h2") cfg.h2 = num;
    else if (key == "h3") cfg.h3 = num;
    else if (key == "m") cfg.m = num;
    else if (key == "k") cfg.k = num;
    else throw format_error("unknown checkpoint config key '" + key + "'");
  }

  GDNet<float> model = init_model<float>(cfg, 0);

  // Validate each header entry against the freshly built model, then read the
  // payload in the same order.
  std::vector<std::pair<std::string, std::vector<std::size_t>>> entries;
  std::string line;
  while (std::getline(header, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag, name;
    ls >> tag >> name;
    if (tag != "tensor") {
      throw format_error("bad checkpoint header line '" + line + "'");
    }
    std::vector<std::size_t> shape;
    std::size_t d;
    while (ls >> d) shape.push_back(d);
    entries.emplace_back(name, shape);
  }

  std::size_t idx = 0;
  model.for_each_param([&](const char* name, GradSlot<float>& slot) {
    if (idx >= entries.size()) {
      throw format_error("checkpoint header lists too few tensors: " + path);
    }
    const auto& [ename, eshape] = entries[idx++];
    if (ename != name || eshape != slot.value.shape()) {
      throw format_error("checkpoint tensor mismatch at '" + ename +
                         "' (expected '" + name + "' " +
                         shape_str(slot.value.shape()) + ")");
    }
    in.read(reinterpret_cast<char*>(slot.value.data()),
            static_cast<std::streamsize>(slot.value.size() * sizeof(float)));
    if (static_cast<std::size_t>(in.gcount()) !=
        slot.value.size() * sizeof(float)) {
      throw format_error("truncated checkpoint payload: " + path);
    }
  });
  if (idx != entries.size()) {
    throw format_error("checkpoint header lists extra tensors: " + path);
  }
  return model;
}

void dump_features(GDNet<float>& model, const SampleSet& samples,
                   const PaddedScene& scene, FeatureStage stage,
                   const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write feature csv: " + path);

  const std::size_t r = model.config.r;
  const std::size_t width = stage == FeatureStage::kAfterLast
                                ? model.config.feature_width()
                                : model.config.h2 * r * r;
  out << "row,col,label";
  for (std::size_t i = 0; i < width; ++i) out << ",f" << i;
  out << "\n";

  Tensor batch({1, 3, r, r});
  ModelCache<float> cache;
  char buf[32];
  for (const Sample& s : samples.samples) {
    extract_patch_into(scene, s.row, s.col, r, batch.data());
    ForwardResult<float> fwd = model.forward(batch, &cache);
    out << s.row << "," << s.col << "," << static_cast<int>(s.label);
    if (stage == FeatureStage::kAfterLast) {
      for (std::size_t i = 0; i < width; ++i) {
        std::snprintf(buf, sizeof(buf), "%.6g", fwd.features[i]);
        out << "," << buf;
      }
    } else {
      const Tensor before =
          activation(Activation::kRelu, cache.relu_pre[0][1]);
      for (std::size_t i = 0; i < width; ++i) {
        std::snprintf(buf, sizeof(buf), "%.6g", before[i]);
        out << "," << buf;
      }
    }
    out << "\n";
  }
  if (!out) throw io_error("feature csv write failed: " + path);
}

}  // namespace gdnet
