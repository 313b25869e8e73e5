#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gdnet/model.hpp"
#include "gdnet/patches.hpp"

namespace gdnet {

enum class MixupMode { kNone, kStandard, kTwoStage };

struct TrainConfig {
  std::size_t epochs = 200;  // even; first half of TWO_STAGE always mixes
  std::size_t batch_size = 64;
  float learning_rate = 1e-3f;
  MixupMode mixup_mode = MixupMode::kTwoStage;
  double alpha = 1.0;  // Beta concentration for lambda
  std::uint64_t seed = 42;
  // Test hook: replaces the Beta draw with a fixed lambda.
  std::optional<float> lambda_override;
};

struct TrainRecord {
  std::vector<double> epoch_loss;    // mean loss per epoch
  std::vector<double> mixing_rate;   // fraction of minibatches mixed
  std::uint64_t seed = 0;
};

// lambda ~ Beta(alpha, alpha) via the two-gamma construction.
double sample_lambda(double alpha, std::mt19937_64& rng);

// x~_i = l*x_i + (1-l)*x_perm(i), same for labels. One lambda per batch.
void mixup_batch(PatchBatch& batch, float lambda,
                 const std::vector<std::size_t>& permutation);

// Whether this minibatch is mixed. TWO_STAGE: always during the first half,
// then with probability eps = 2(num-i)/num (one uniform draw per call).
bool mixing_decision(std::size_t epoch, std::size_t num_epochs, MixupMode mode,
                     std::mt19937_64& rng);

TrainRecord train_model(GDNet<float>& model, const SampleSet& samples,
                        const PaddedScene& scene, const TrainConfig& config);

// CSV `epoch,mean_loss,mixing_rate`.
void write_train_log(const TrainRecord& record, const std::string& path);

}  // namespace gdnet
