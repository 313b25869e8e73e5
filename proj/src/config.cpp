#include "gdnet/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "gdnet/errors.hpp"

namespace gdnet {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string strip_quotes(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\''))) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(value, &pos);
  } catch (const std::exception&) {
    throw config_error("config key '" + key + "': expected an integer, got '" +
                       value + "'");
  }
  if (pos != value.size()) {
    throw config_error("config key '" + key + "': expected an integer, got '" +
                       value + "'");
  }
  return v;
}

double parse_real(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw config_error("config key '" + key + "': expected a number, got '" +
                       value + "'");
  }
  if (pos != value.size()) {
    throw config_error("config key '" + key + "': expected a number, got '" +
                       value + "'");
  }
  return v;
}

}  // namespace

std::string mixup_mode_name(MixupMode mode) {
  switch (mode) {
    case MixupMode::kNone:
      return "none";
    case MixupMode::kStandard:
      return "standard";
    case MixupMode::kTwoStage:
      return "two-stage";
  }
  return "two-stage";
}

std::string conv_mode_name(ConvMode mode) {
  return mode == ConvMode::kGdconv ? "gdconv" : "static";
}

void apply_config_entry(PipelineConfig& config, const std::string& key,
                        const std::string& value) {
  if (key == "t1") config.t1_path = strip_quotes(value);
  else if (key == "t2") config.t2_path = strip_quotes(value);
  else if (key == "ground_truth") config.ground_truth_path = strip_quotes(value);
  else if (key == "output_dir") config.output_dir = strip_quotes(value);
  else if (key == "r") config.r = parse_size(key, value);
  else if (key == "h1") config.h1 = parse_size(key, value);
  else if (key == "h2") config.h2 = parse_size(key, value);
  else if (key == "h3") config.h3 = parse_size(key, value);
  else if (key == "m") config.m = parse_size(key, value);
  else if (key == "k") config.k = parse_size(key, value);
  else if (key == "epochs") config.epochs = parse_size(key, value);
  else if (key == "batch_size") config.batch_size = parse_size(key, value);
  else if (key == "learning_rate") config.learning_rate = parse_real(key, value);
  else if (key == "alpha") config.alpha = parse_real(key, value);
  else if (key == "per_class_cap") config.per_class_cap = parse_size(key, value);
  else if (key == "seed") config.seed = parse_size(key, value);
  else if (key == "mixup_mode") {
    const std::string v = strip_quotes(value);
    if (v == "none") config.mixup_mode = MixupMode::kNone;
    else if (v == "standard") config.mixup_mode = MixupMode::kStandard;
    else if (v == "two-stage") config.mixup_mode = MixupMode::kTwoStage;
    else
      throw config_error("config key 'mixup_mode': expected "
                         "none|standard|two-stage, got '" + v + "'");
  } else if (key == "conv_mode") {
    const std::string v = strip_quotes(value);
    if (v == "gdconv") config.conv_mode = ConvMode::kGdconv;
    else if (v == "static") config.conv_mode = ConvMode::kStatic;
    else
      throw config_error("config key 'conv_mode': expected gdconv|static, "
                         "got '" + v + "'");
  } else {
    throw config_error("unknown config key '" + key + "'");
  }
}

PipelineConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config file: " + path);
  PipelineConfig config;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw config_error("config line " + std::to_string(lineno) +
                         " is not 'key = value': " + stripped);
    }
    apply_config_entry(config, trim(stripped.substr(0, eq)),
                       trim(stripped.substr(eq + 1)));
  }
  return config;
}

void validate_config(const PipelineConfig& config) {
  if (config.r < 2) throw config_error("r must be >= 2");
  if (config.k % 2 == 0 || config.k == 0) throw config_error("k must be odd");
  if (config.m < 1) throw config_error("m must be >= 1");
  if (config.h1 < 1 || config.h2 < 1 || config.h3 < 1) {
    throw config_error("channel plan entries must be >= 1");
  }
  if (config.batch_size < 2) throw config_error("batch_size must be >= 2");
  if (config.learning_rate <= 0.0) throw config_error("learning_rate must be positive");
  if (config.alpha <= 0.0) throw config_error("alpha must be positive");
  if (config.per_class_cap < 1) throw config_error("per_class_cap must be >= 1");
  if (config.mixup_mode == MixupMode::kTwoStage && config.epochs % 2 != 0) {
    throw config_error("epochs must be even with two-stage mixup");
  }
}

std::string config_to_string(const PipelineConfig& c) {
  std::ostringstream out;
  out << "t1 = " << c.t1_path << "\n";
  out << "t2 = " << c.t2_path << "\n";
  out << "ground_truth = " << c.ground_truth_path << "\n";
  out << "output_dir = " << c.output_dir << "\n";
  out << "r = " << c.r << "\n";
  out << "h1 = " << c.h1 << "\n";
  out << "h2 = " << c.h2 << "\n";
  out << "h3 = " << c.h3 << "\n";
  out << "m = " << c.m << "\n";
  out << "k = " << c.k << "\n";
  out << "epochs = " << c.epochs << "\n";
  out << "batch_size = " << c.batch_size << "\n";
  out << "learning_rate = " << c.learning_rate << "\n";
  out << "mixup_mode = " << mixup_mode_name(c.mixup_mode) << "\n";
  out << "alpha = " << c.alpha << "\n";
  out << "conv_mode = " << conv_mode_name(c.conv_mode) << "\n";
  out << "per_class_cap = " << c.per_class_cap << "\n";
  out << "seed = " << c.seed << "\n";
  return out.str();
}

}  // namespace gdnet
