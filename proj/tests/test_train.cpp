#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gdnet/train.hpp"

using namespace gdnet;

TEST_CASE("sample_lambda stays in [0,1] with the right mean for alpha=1") {
  std::mt19937_64 rng(1);
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double l = sample_lambda(1.0, rng);
    CHECK(l >= 0.0);
    CHECK(l <= 1.0);
    sum += l;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("sample_lambda concentrates near 0.5 for large alpha") {
  std::mt19937_64 rng(2);
  double var = 0.0;
  const int n = 5000;
  for (int i = 0; i < n; ++i) {
    const double l = sample_lambda(100.0, rng);
    var += (l - 0.5) * (l - 0.5);
  }
  // Beta(100,100) variance is 1/(4*201) ~ 0.00124.
  CHECK(var / n < 0.01);
}

TEST_CASE("sample_lambda rejects non-positive alpha") {
  std::mt19937_64 rng(3);
  CHECK_THROWS_AS(sample_lambda(0.0, rng), config_error);
  CHECK_THROWS_AS(sample_lambda(-1.0, rng), config_error);
}

namespace {

PatchBatch two_sample_batch() {
  PatchBatch batch;
  batch.inputs = Tensor({2, 3, 2, 2});
  for (std::size_t i = 0; i < 12; ++i) {
    batch.inputs[i] = 1.0f;        // sample 0
    batch.inputs[12 + i] = 3.0f;   // sample 1
  }
  batch.labels = Tensor({2, 2});
  batch.labels.at2(0, 0) = 1.0f;
  batch.labels.at2(1, 1) = 1.0f;
  return batch;
}

}  // namespace

TEST_CASE("mixup_batch blends inputs and labels by the same lambda") {
  PatchBatch batch = two_sample_batch();
  mixup_batch(batch, 0.25f, {1, 0});
  // Sample 0: 0.25*1 + 0.75*3 = 2.5; sample 1: 0.25*3 + 0.75*1 = 1.5.
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(batch.inputs[i] == doctest::Approx(2.5));
    CHECK(batch.inputs[12 + i] == doctest::Approx(1.5));
  }
  CHECK(batch.labels.at2(0, 0) == doctest::Approx(0.25));
  CHECK(batch.labels.at2(0, 1) == doctest::Approx(0.75));
  CHECK(batch.labels.at2(1, 0) == doctest::Approx(0.75));
  CHECK(batch.labels.at2(1, 1) == doctest::Approx(0.25));
}

TEST_CASE("mixup_batch with lambda=1 is a no-op") {
  PatchBatch batch = two_sample_batch();
  const Tensor before_x = batch.inputs;
  const Tensor before_y = batch.labels;
  mixup_batch(batch, 1.0f, {1, 0});
  for (std::size_t i = 0; i < batch.inputs.size(); ++i) {
    CHECK(batch.inputs[i] == before_x[i]);
  }
  for (std::size_t i = 0; i < batch.labels.size(); ++i) {
    CHECK(batch.labels[i] == before_y[i]);
  }
}

TEST_CASE("mixed labels remain distributions") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    PatchBatch batch = two_sample_batch();
    mixup_batch(batch, static_cast<float>(unit(rng)), {1, 0});
    for (std::size_t s = 0; s < 2; ++s) {
      CHECK(batch.labels.at2(s, 0) + batch.labels.at2(s, 1) ==
            doctest::Approx(1.0));
      CHECK(batch.labels.at2(s, 0) >= 0.0f);
      CHECK(batch.labels.at2(s, 1) >= 0.0f);
    }
  }
}

TEST_CASE("mixup_batch validates the permutation") {
  PatchBatch batch = two_sample_batch();
  CHECK_THROWS_AS(mixup_batch(batch, 0.5f, {0}), dimension_error);
  CHECK_THROWS_AS(mixup_batch(batch, 0.5f, {0, 5}), dimension_error);
}

TEST_CASE("mixing_decision mode table") {
  std::mt19937_64 rng(5);
  CHECK_FALSE(mixing_decision(10, 100, MixupMode::kNone, rng));
  CHECK(mixing_decision(10, 100, MixupMode::kStandard, rng));
  CHECK(mixing_decision(100, 100, MixupMode::kStandard, rng));

  // First half always mixes.
  for (std::size_t e = 1; e <= 50; ++e) {
    CHECK(mixing_decision(e, 100, MixupMode::kTwoStage, rng));
  }
  // Final epoch never mixes: eps = 0.
  for (int i = 0; i < 200; ++i) {
    CHECK_FALSE(mixing_decision(100, 100, MixupMode::kTwoStage, rng));
  }
}

TEST_CASE("second-stage mixing frequency follows the linear ramp") {
  // Epoch 150 of 200: eps = 2*(200-150)/200 = 0.5.
  std::mt19937_64 rng(6);
  int hits = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    hits += mixing_decision(150, 200, MixupMode::kTwoStage, rng) ? 1 : 0;
  }
  CHECK(static_cast<double>(hits) / n == doctest::Approx(0.5).epsilon(0.03));

  // Epoch 175 of 200: eps = 0.25.
  hits = 0;
  for (int i = 0; i < n; ++i) {
    hits += mixing_decision(175, 200, MixupMode::kTwoStage, rng) ? 1 : 0;
  }
  CHECK(static_cast<double>(hits) / n == doctest::Approx(0.25).epsilon(0.06));
}

TEST_CASE("mixing_decision rejects epochs outside [1, num]") {
  std::mt19937_64 rng(7);
  CHECK_THROWS_AS(mixing_decision(0, 100, MixupMode::kNone, rng), config_error);
  CHECK_THROWS_AS(mixing_decision(101, 100, MixupMode::kNone, rng),
                  config_error);
}

namespace {

// A small separable scene: the difference image carries the class signal.
struct TrainFixture {
  SarImagePair pair;
  DifferenceImage di;
  PaddedScene scene;
  SampleSet samples;

  explicit TrainFixture(std::size_t w = 24, std::size_t h = 24,
                        std::size_t r = 6) {
    pair.t1.width = pair.t2.width = w;
    pair.t1.height = pair.t2.height = h;
    pair.t1.pixels.assign(w * h, 0.4f);
    pair.t2.pixels.assign(w * h, 0.6f);
    di.width = w;
    di.height = h;
    di.pixels.assign(w * h, 0.0f);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<float> low(0.0f, 0.2f);
    std::uniform_real_distribution<float> high(0.8f, 1.0f);
    for (std::size_t row = 0; row < h; ++row) {
      for (std::size_t col = 0; col < w; ++col) {
        const bool changed = col >= w / 2;
        di.pixels[row * w + col] = changed ? high(rng) : low(rng);
        samples.samples.push_back(
            {row, col, static_cast<std::uint8_t>(changed ? 1 : 0)});
      }
    }
    scene = PaddedScene::build(pair, di, r);
  }
};

ModelConfig small_model_config() {
  ModelConfig cfg;
  cfg.r = 6;
  cfg.h1 = 4;
  cfg.h2 = 4;
  cfg.h3 = 2;
  cfg.m = 2;
  cfg.k = 3;
  return cfg;
}

}  // namespace

TEST_CASE("training separates an easy scene with shrinking loss") {
  const TrainFixture fx;
  GDNet<float> model = init_model<float>(small_model_config(), 42);
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.batch_size = 32;
  cfg.mixup_mode = MixupMode::kNone;
  cfg.seed = 42;
  const TrainRecord record = train_model(model, fx.samples, fx.scene, cfg);
  REQUIRE(record.epoch_loss.size() == 10);
  CHECK(record.epoch_loss.back() < record.epoch_loss.front());
  CHECK(record.epoch_loss.back() < 0.1);

  // Classify interior pixels: well above 99% accuracy on this easy split.
  std::size_t correct = 0;
  Tensor batch({1, 3, 6, 6});
  for (const Sample& s : fx.samples.samples) {
    extract_patch_into(fx.scene, s.row, s.col, 6, batch.data());
    const ForwardResult<float> fwd = model.forward(batch);
    const int pred = fwd.logits.at2(0, 1) > fwd.logits.at2(0, 0) ? 1 : 0;
    correct += pred == static_cast<int>(s.label) ? 1 : 0;
  }
  const double acc =
      static_cast<double>(correct) / static_cast<double>(fx.samples.samples.size());
  CHECK(acc >= 0.99);
}

TEST_CASE("training is bit-deterministic per seed") {
  const TrainFixture fx;
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.batch_size = 32;
  cfg.mixup_mode = MixupMode::kTwoStage;
  cfg.seed = 7;

  GDNet<float> a = init_model<float>(small_model_config(), 7);
  GDNet<float> b = init_model<float>(small_model_config(), 7);
  const TrainRecord ra = train_model(a, fx.samples, fx.scene, cfg);
  const TrainRecord rb = train_model(b, fx.samples, fx.scene, cfg);
  CHECK(ra.epoch_loss == rb.epoch_loss);
  bool identical = true;
  std::vector<Tensor*> av, bv;
  a.for_each_param([&](const char*, GradSlot<float>& s) { av.push_back(&s.value); });
  b.for_each_param([&](const char*, GradSlot<float>& s) { bv.push_back(&s.value); });
  for (std::size_t i = 0; i < av.size(); ++i) {
    for (std::size_t j = 0; j < av[i]->size(); ++j) {
      identical = identical && (*av[i])[j] == (*bv[i])[j];
    }
  }
  CHECK(identical);
}

TEST_CASE("no-mixup equals standard mixup pinned at lambda=1, bit for bit") {
  const TrainFixture fx;
  TrainConfig none_cfg;
  none_cfg.epochs = 3;
  none_cfg.batch_size = 32;
  none_cfg.mixup_mode = MixupMode::kNone;
  none_cfg.seed = 5;

  TrainConfig pinned_cfg = none_cfg;
  pinned_cfg.mixup_mode = MixupMode::kStandard;
  pinned_cfg.lambda_override = 1.0f;

  GDNet<float> a = init_model<float>(small_model_config(), 5);
  GDNet<float> b = init_model<float>(small_model_config(), 5);
  const TrainRecord ra = train_model(a, fx.samples, fx.scene, none_cfg);
  const TrainRecord rb = train_model(b, fx.samples, fx.scene, pinned_cfg);
  CHECK(ra.epoch_loss == rb.epoch_loss);
  CHECK(rb.mixing_rate.front() == 1.0);
  CHECK(ra.mixing_rate.front() == 0.0);
  bool identical = true;
  std::vector<Tensor*> av, bv;
  a.for_each_param([&](const char*, GradSlot<float>& s) { av.push_back(&s.value); });
  b.for_each_param([&](const char*, GradSlot<float>& s) { bv.push_back(&s.value); });
  for (std::size_t i = 0; i < av.size(); ++i) {
    for (std::size_t j = 0; j < av[i]->size(); ++j) {
      identical = identical && (*av[i])[j] == (*bv[i])[j];
    }
  }
  CHECK(identical);
}

TEST_CASE("two-stage training mixes every batch early and tapers late") {
  const TrainFixture fx;
  TrainConfig cfg;
  cfg.epochs = 8;
  cfg.batch_size = 32;
  cfg.mixup_mode = MixupMode::kTwoStage;
  cfg.seed = 12;
  GDNet<float> model = init_model<float>(small_model_config(), 12);
  const TrainRecord record = train_model(model, fx.samples, fx.scene, cfg);
  REQUIRE(record.mixing_rate.size() == 8);
  for (std::size_t e = 0; e < 4; ++e) CHECK(record.mixing_rate[e] == 1.0);
  CHECK(record.mixing_rate[7] == 0.0);  // final epoch, eps = 0
}

TEST_CASE("zero epochs yields an empty record") {
  const TrainFixture fx;
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.mixup_mode = MixupMode::kNone;
  GDNet<float> model = init_model<float>(small_model_config(), 1);
  const TrainRecord record = train_model(model, fx.samples, fx.scene, cfg);
  CHECK(record.epoch_loss.empty());
  CHECK(record.mixing_rate.empty());
}

TEST_CASE("train_model validates its configuration") {
  const TrainFixture fx;
  GDNet<float> model = init_model<float>(small_model_config(), 1);
  TrainConfig cfg;
  cfg.batch_size = 1;
  CHECK_THROWS_AS(train_model(model, fx.samples, fx.scene, cfg), config_error);

  cfg.batch_size = 32;
  cfg.epochs = 7;  // odd with two-stage
  cfg.mixup_mode = MixupMode::kTwoStage;
  CHECK_THROWS_AS(train_model(model, fx.samples, fx.scene, cfg), config_error);

  cfg.epochs = 4;
  CHECK_THROWS_AS(train_model(model, SampleSet{}, fx.scene, cfg), config_error);
}
