#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gdnet/errors.hpp"
#include "gdnet/pipeline.hpp"

namespace {

// Ordered so later entries override the config file in declaration order.
using Overrides = std::vector<std::pair<std::string, std::string>>;

void add_config_flags(CLI::App* cmd, std::shared_ptr<Overrides> overrides) {
  static const char* kKeys[] = {
      "t1",         "t2",        "ground_truth", "output_dir",
      "r",          "h1",        "h2",           "h3",
      "m",          "k",         "epochs",       "batch_size",
      "learning_rate", "mixup_mode", "alpha",    "conv_mode",
      "per_class_cap", "seed"};
  for (const char* key : kKeys) {
    cmd->add_option_function<std::string>(
        std::string("--") + key,
        [overrides, key](const std::string& v) {
          overrides->emplace_back(key, v);
        },
        std::string("config key ") + key);
  }
}

gdnet::PipelineConfig resolve_config(const std::string& config_file,
                                     const Overrides& overrides) {
  gdnet::PipelineConfig config;
  if (!config_file.empty()) {
    config = gdnet::parse_config_file(config_file);
  }
  for (const auto& [key, value] : overrides) {
    gdnet::apply_config_entry(config, key, value);
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GDNet: self-supervised SAR change detection"};
  app.require_subcommand(1);

  std::string config_file;
  app.add_option("--config", config_file, "key = value config file");

  struct SubSpec {
    CLI::App* cmd = nullptr;
    std::shared_ptr<Overrides> overrides;
  };
  std::map<std::string, SubSpec> subs;
  auto add_sub = [&](const std::string& name, const std::string& desc) {
    SubSpec spec;
    spec.cmd = app.add_subcommand(name, desc);
    spec.cmd->fallthrough();
    spec.overrides = std::make_shared<Overrides>();
    add_config_flags(spec.cmd, spec.overrides);
    subs[name] = spec;
    return spec.cmd;
  };

  add_sub("preclassify", "FCM preclassification, writes the pseudo-label map");
  add_sub("train", "train the network, writes checkpoint and loss log");
  add_sub("predict", "pixel-wise change map from a checkpoint");
  add_sub("eval", "metrics report for a change map against ground truth");
  add_sub("pipeline", "preclassify + train + predict + eval in sequence");
  add_sub("synth", "generate a synthetic speckled scene with ground truth");
  add_sub("summary", "parameter and FLOP counts for the configured model");
  add_sub("dump-features", "export per-sample feature vectors as CSV");

  std::string checkpoint;
  subs["predict"].cmd->add_option("--checkpoint", checkpoint,
                                  "checkpoint path (default <output_dir>/model.gdnt)");
  subs["dump-features"].cmd->add_option("--checkpoint", checkpoint,
                                        "checkpoint path");
  std::string stage = "after-last";
  subs["dump-features"].cmd
      ->add_option("--stage", stage, "before-last|after-last")
      ->check(CLI::IsMember({"before-last", "after-last"}));
  std::string prediction;
  subs["eval"].cmd->add_option("--prediction", prediction,
                               "change map to score (default <output_dir>/change_map.pgm)");

  std::size_t synth_width = 256, synth_height = 256;
  double synth_fraction = 0.1, synth_looks = 4.0;
  subs["synth"].cmd->add_option("--width", synth_width, "scene width");
  subs["synth"].cmd->add_option("--height", synth_height, "scene height");
  subs["synth"].cmd->add_option("--change-fraction", synth_fraction,
                                "target changed fraction");
  subs["synth"].cmd->add_option("--looks", synth_looks, "speckle looks L");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::endl;
    return 2;
  }

  try {
    const CLI::App* active = app.get_subcommands().front();
    const std::string name = active->get_name();
    gdnet::PipelineConfig config =
        resolve_config(config_file, *subs[name].overrides);

    if (name == "preclassify") {
      gdnet::run_preclassify(config);
    } else if (name == "train") {
      gdnet::run_train(config);
    } else if (name == "predict") {
      gdnet::run_predict(config, checkpoint.empty()
                                     ? gdnet::checkpoint_path(config)
                                     : checkpoint);
    } else if (name == "eval") {
      const gdnet::MetricsReport report = gdnet::run_eval(
          config, prediction.empty() ? gdnet::change_map_path(config)
                                     : prediction);
      std::cout << "pcc_percent=" << report.pcc_percent
                << " kc_percent=" << report.kc_percent << std::endl;
    } else if (name == "pipeline") {
      const auto report = gdnet::run_pipeline(config);
      if (report) {
        std::cout << "pcc_percent=" << report->pcc_percent
                  << " kc_percent=" << report->kc_percent << std::endl;
      }
    } else if (name == "synth") {
      gdnet::SynthConfig synth;
      synth.seed = config.seed;
      synth.width = synth_width;
      synth.height = synth_height;
      synth.change_fraction_target = synth_fraction;
      synth.looks = synth_looks;
      gdnet::run_synth(config, synth);
    } else if (name == "summary") {
      gdnet::run_summary(config, std::cout);
    } else if (name == "dump-features") {
      gdnet::run_dump_features(config,
                               checkpoint.empty()
                                   ? gdnet::checkpoint_path(config)
                                   : checkpoint,
                               stage == "before-last"
                                   ? gdnet::FeatureStage::kBeforeLast
                                   : gdnet::FeatureStage::kAfterLast);
    }
    return 0;
  } catch (const gdnet::config_error& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
}
