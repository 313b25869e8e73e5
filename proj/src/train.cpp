#include "gdnet/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "gdnet/errors.hpp"

namespace gdnet {

double sample_lambda(double alpha, std::mt19937_64& rng) {
  if (alpha <= 0.0) throw config_error("sample_lambda: alpha must be positive");
  std::gamma_distribution<double> gamma(alpha, 1.0);
  const double x = gamma(rng);
  const double y = gamma(rng);
  if (x + y == 0.0) return 0.5;
  return x / (x + y);
}

void mixup_batch(PatchBatch& batch, float lambda,
                 const std::vector<std::size_t>& permutation) {
  const std::size_t b = batch.inputs.dim(0);
  if (permutation.size() != b) {
    throw dimension_error("mixup_batch: permutation length mismatch");
  }
  const std::size_t stride = batch.inputs.size() / b;
  Tensor mixed_x = batch.inputs;
  Tensor mixed_y = batch.labels;
  const float l = lambda, lc = 1.0f - lambda;
  for (std::size_t i = 0; i < b; ++i) {
    const std::size_t j = permutation[i];
    if (j >= b) throw dimension_error("mixup_batch: permutation out of range");
    const float* xi = batch.inputs.data() + i * stride;
    const float* xj = batch.inputs.data() + j * stride;
    float* xo = mixed_x.data() + i * stride;
    for (std::size_t t = 0; t < stride; ++t) xo[t] = l * xi[t] + lc * xj[t];
    for (std::size_t t = 0; t < 2; ++t) {
      mixed_y.at2(i, t) = l * batch.labels.at2(i, t) + lc * batch.labels.at2(j, t);
    }
  }
  batch.inputs = std::move(mixed_x);
  batch.labels = std::move(mixed_y);
}

bool mixing_decision(std::size_t epoch, std::size_t num_epochs, MixupMode mode,
                     std::mt19937_64& rng) {
  if (epoch < 1 || epoch > num_epochs) {
    throw config_error("mixing_decision: epoch out of range");
  }
  switch (mode) {
    case MixupMode::kNone:
      return false;
    case MixupMode::kStandard:
      return true;
    case MixupMode::kTwoStage: {
      if (2 * epoch <= num_epochs) return true;
      const double eps = 2.0 * static_cast<double>(num_epochs - epoch) /
                         static_cast<double>(num_epochs);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      return unit(rng) < eps;
    }
  }
  return false;
}

TrainRecord train_model(GDNet<float>& model, const SampleSet& samples,
                        const PaddedScene& scene, const TrainConfig& config) {
  if (config.batch_size < 2) {
    throw config_error("train_model: batch size must be >= 2");
  }
  if (samples.samples.empty()) {
    throw config_error("train_model: empty sample set");
  }
  if (config.mixup_mode == MixupMode::kTwoStage && config.epochs % 2 != 0) {
    throw config_error("train_model: two-stage mixup needs an even epoch count");
  }

  TrainRecord record;
  record.seed = config.seed;
  if (config.epochs == 0) return record;

  std::vector<AdamState<float>> states;
  std::vector<GradSlot<float>*> params;
  model.for_each_param([&](const char*, GradSlot<float>& slot) {
    states.emplace_back(slot.value.shape(), config.learning_rate);
    params.push_back(&slot);
  });

  // Separate streams so the mixup machinery never perturbs batch order.
  std::mt19937_64 mix_rng(config.seed * 0x9e3779b97f4a7c15ULL + 1);

  ModelCache<float> cache;
  Tensor grad_logits;
  std::vector<std::size_t> perm;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const std::uint64_t epoch_seed = config.seed + 0x51ed2701ULL * epoch;
    std::vector<PatchBatch> batches = make_minibatches(
        samples, scene, model.config.r, config.batch_size, epoch_seed);

    double loss_sum = 0.0;
    std::size_t mixed = 0;
    for (PatchBatch& batch : batches) {
      const bool mix =
          mixing_decision(epoch, config.epochs, config.mixup_mode, mix_rng);
      if (mix) {
        ++mixed;
        const float lambda =
            config.lambda_override
                ? *config.lambda_override
                : static_cast<float>(sample_lambda(config.alpha, mix_rng));
        const std::size_t b = batch.inputs.dim(0);
        perm.resize(b);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), mix_rng);
        mixup_batch(batch, lambda, perm);
      }

      ForwardResult<float> fwd = model.forward(batch.inputs, &cache);
      const float loss =
          soft_cross_entropy(fwd.logits, batch.labels, &grad_logits);
      if (!std::isfinite(loss)) {
        throw numeric_error("train_model: loss diverged at epoch " +
                            std::to_string(epoch));
      }
      model.zero_grads();
      model.backward(cache, grad_logits);
      for (std::size_t p = 0; p < params.size(); ++p) {
        adam_update(*params[p], states[p]);
      }
      loss_sum += loss;
    }
    record.epoch_loss.push_back(loss_sum / static_cast<double>(batches.size()));
    record.mixing_rate.push_back(static_cast<double>(mixed) /
                                 static_cast<double>(batches.size()));
  }
  return record;
}

void write_train_log(const TrainRecord& record, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write train log: " + path);
  out << "epoch,mean_loss,mixing_rate\n";
  char buf[64];
  for (std::size_t i = 0; i < record.epoch_loss.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.4f", i + 1,
                  record.epoch_loss[i], record.mixing_rate[i]);
    out << buf << "\n";
  }
  if (!out) throw io_error("train log write failed: " + path);
}

}  // namespace gdnet
