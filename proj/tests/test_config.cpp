#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "gdnet/config.hpp"

using namespace gdnet;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

struct FileGuard {
  std::string path;
  explicit FileGuard(std::string p) : path(std::move(p)) {}
  ~FileGuard() { std::remove(path.c_str()); }
};

std::string write_config(const std::string& name, const std::string& body) {
  const std::string path = temp_path(name);
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("an empty config file yields the documented defaults") {
  const std::string path = write_config("gdnet_cfg_empty.txt", "");
  FileGuard guard(path);
  const PipelineConfig cfg = parse_config_file(path);
  CHECK(cfg.r == 12);
  CHECK(cfg.h1 == 16);
  CHECK(cfg.h2 == 32);
  CHECK(cfg.h3 == 6);
  CHECK(cfg.m == 4);
  CHECK(cfg.k == 3);
  CHECK(cfg.epochs == 200);
  CHECK(cfg.batch_size == 64);
  CHECK(cfg.learning_rate == doctest::Approx(1e-3));
  CHECK(cfg.mixup_mode == MixupMode::kTwoStage);
  CHECK(cfg.alpha == doctest::Approx(1.0));
  CHECK(cfg.conv_mode == ConvMode::kGdconv);
  CHECK(cfg.per_class_cap == 8000);
  CHECK(cfg.seed == 42);
  CHECK(cfg.output_dir == ".");
  validate_config(cfg);  // defaults must be self-consistent
}

TEST_CASE("comments and blank lines are ignored, one override applies") {
  const std::string path = write_config("gdnet_cfg_one.txt",
                                        "# speed run\n"
                                        "\n"
                                        "epochs = 50\n");
  FileGuard guard(path);
  const PipelineConfig cfg = parse_config_file(path);
  CHECK(cfg.epochs == 50);
  CHECK(cfg.batch_size == 64);  // untouched default
}

TEST_CASE("every scalar key is assignable from a file") {
  const std::string path = write_config(
      "gdnet_cfg_all.txt",
      "t1 = a.pgm\nt2 = b.pgm\nground_truth = gt.pgm\noutput_dir = out\n"
      "r = 10\nh1 = 8\nh2 = 12\nh3 = 4\nm = 3\nk = 5\nepochs = 20\n"
      "batch_size = 16\nlearning_rate = 0.01\nmixup_mode = standard\n"
      "alpha = 0.5\nconv_mode = static\nper_class_cap = 500\nseed = 9\n");
  FileGuard guard(path);
  const PipelineConfig cfg = parse_config_file(path);
  CHECK(cfg.t1_path == "a.pgm");
  CHECK(cfg.t2_path == "b.pgm");
  CHECK(cfg.ground_truth_path == "gt.pgm");
  CHECK(cfg.output_dir == "out");
  CHECK(cfg.r == 10);
  CHECK(cfg.h1 == 8);
  CHECK(cfg.h2 == 12);
  CHECK(cfg.h3 == 4);
  CHECK(cfg.m == 3);
  CHECK(cfg.k == 5);
  CHECK(cfg.epochs == 20);
  CHECK(cfg.batch_size == 16);
  CHECK(cfg.learning_rate == doctest::Approx(0.01));
  CHECK(cfg.mixup_mode == MixupMode::kStandard);
  CHECK(cfg.alpha == doctest::Approx(0.5));
  CHECK(cfg.conv_mode == ConvMode::kStatic);
  CHECK(cfg.per_class_cap == 500);
  CHECK(cfg.seed == 9);
}

TEST_CASE("a type mismatch names the offending key") {
  const std::string path =
      write_config("gdnet_cfg_badtype.txt", "epochs = abc\n");
  FileGuard guard(path);
  try {
    parse_config_file(path);
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("epochs") != std::string::npos);
  }
}

TEST_CASE("an unknown key is rejected by name") {
  const std::string path =
      write_config("gdnet_cfg_unknown.txt", "epcohs = 50\n");
  FileGuard guard(path);
  try {
    parse_config_file(path);
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("epcohs") != std::string::npos);
  }
}

TEST_CASE("a line without '=' is rejected with its line number") {
  const std::string path =
      write_config("gdnet_cfg_noeq.txt", "# fine\nepochs 50\n");
  FileGuard guard(path);
  try {
    parse_config_file(path);
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("enumerated keys reject unknown values") {
  PipelineConfig cfg;
  CHECK_THROWS_AS(apply_config_entry(cfg, "mixup_mode", "sometimes"),
                  config_error);
  CHECK_THROWS_AS(apply_config_entry(cfg, "conv_mode", "dynamic"),
                  config_error);
}

TEST_CASE("validate_config enforces the documented bounds") {
  PipelineConfig cfg;
  cfg.r = 1;
  CHECK_THROWS_AS(validate_config(cfg), config_error);
  cfg = PipelineConfig{};
  cfg.k = 4;
  CHECK_THROWS_AS(validate_config(cfg), config_error);
  cfg = PipelineConfig{};
  cfg.batch_size = 1;
  CHECK_THROWS_AS(validate_config(cfg), config_error);
  cfg = PipelineConfig{};
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(validate_config(cfg), config_error);
  cfg = PipelineConfig{};
  cfg.alpha = -1.0;
  CHECK_THROWS_AS(validate_config(cfg), config_error);
  cfg = PipelineConfig{};
  cfg.per_class_cap = 0;
  CHECK_THROWS_AS(validate_config(cfg), config_error);
  cfg = PipelineConfig{};
  cfg.epochs = 201;  // odd with the default two-stage schedule
  CHECK_THROWS_AS(validate_config(cfg), config_error);
  cfg.mixup_mode = MixupMode::kNone;
  validate_config(cfg);  // odd epochs fine without two-stage
}

TEST_CASE("config_to_string round-trips through the parser") {
  PipelineConfig cfg;
  cfg.t1_path = "x1.pgm";
  cfg.t2_path = "x2.pgm";
  cfg.output_dir = "run7";
  cfg.r = 8;
  cfg.epochs = 30;
  cfg.mixup_mode = MixupMode::kStandard;
  cfg.conv_mode = ConvMode::kStatic;
  cfg.learning_rate = 5e-4;
  cfg.seed = 123;

  const std::string path = temp_path("gdnet_cfg_roundtrip.txt");
  FileGuard guard(path);
  {
    std::ofstream out(path);
    out << config_to_string(cfg);
  }
  const PipelineConfig back = parse_config_file(path);
  CHECK(back.t1_path == cfg.t1_path);
  CHECK(back.t2_path == cfg.t2_path);
  CHECK(back.output_dir == cfg.output_dir);
  CHECK(back.r == cfg.r);
  CHECK(back.epochs == cfg.epochs);
  CHECK(back.mixup_mode == cfg.mixup_mode);
  CHECK(back.conv_mode == cfg.conv_mode);
  CHECK(back.learning_rate == doctest::Approx(cfg.learning_rate));
  CHECK(back.seed == cfg.seed);
}

TEST_CASE("missing config file is an io error") {
  CHECK_THROWS_AS(parse_config_file(temp_path("gdnet_cfg_missing.txt")),
                  io_error);
}
