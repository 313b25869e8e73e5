#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "gdnet/preclassify.hpp"

using namespace gdnet;

namespace {

DifferenceImage make_di(std::size_t w, std::size_t h,
                        std::vector<float> pixels) {
  DifferenceImage di;
  di.width = w;
  di.height = h;
  di.pixels = std::move(pixels);
  return di;
}

}  // namespace

TEST_CASE("fcm centers land on three tight value groups") {
  std::vector<float> values;
  std::mt19937_64 rng(5);
  std::normal_distribution<float> jitter(0.0f, 0.004f);
  for (int i = 0; i < 300; ++i) values.push_back(0.1f + jitter(rng));
  for (int i = 0; i < 300; ++i) values.push_back(0.5f + jitter(rng));
  for (int i = 0; i < 300; ++i) values.push_back(0.9f + jitter(rng));

  const FcmResult fcm = fcm_cluster(values);
  REQUIRE(fcm.centers.size() == 3);
  CHECK(fcm.centers[0] == doctest::Approx(0.1).epsilon(0.05));
  CHECK(fcm.centers[1] == doctest::Approx(0.5).epsilon(0.05));
  CHECK(fcm.centers[2] == doctest::Approx(0.9).epsilon(0.05));
}

TEST_CASE("fcm memberships are a distribution per pixel") {
  std::vector<float> values;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  for (int i = 0; i < 500; ++i) values.push_back(unit(rng));

  const FcmResult fcm = fcm_cluster(values);
  for (std::size_t p = 0; p < values.size(); ++p) {
    double sum = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      const double u = fcm.memberships[p * 3 + j];
      CHECK(u >= 0.0);
      CHECK(u <= 1.0 + 1e-12);
      sum += u;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("fcm objective history is non-increasing") {
  std::vector<float> values;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  for (int i = 0; i < 400; ++i) values.push_back(unit(rng));

  const FcmResult fcm = fcm_cluster(values);
  REQUIRE(!fcm.objective_history.empty());
  for (std::size_t i = 1; i < fcm.objective_history.size(); ++i) {
    CHECK(fcm.objective_history[i] <=
          fcm.objective_history[i - 1] + 1e-9);
  }
}

TEST_CASE("fcm centers come back sorted ascending") {
  std::vector<float> values;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  for (int i = 0; i < 200; ++i) values.push_back(unit(rng));
  const FcmResult fcm = fcm_cluster(values);
  CHECK(std::is_sorted(fcm.centers.begin(), fcm.centers.end()));
}

TEST_CASE("fcm needs at least as many distinct values as clusters") {
  std::vector<float> values(100, 0.3f);
  for (std::size_t i = 0; i < 50; ++i) values[i] = 0.7f;
  CHECK_THROWS_AS(fcm_cluster(values), degenerate_input_error);
}

TEST_CASE("fcm exact memberships on a symmetric two-point layout") {
  // Two clusters, points at 0 and 1: u for the near center must exceed 0.9
  // when the clusters converge onto the points.
  std::vector<float> values;
  for (int i = 0; i < 100; ++i) values.push_back(0.0f);
  for (int i = 0; i < 100; ++i) values.push_back(0.48f);
  for (int i = 0; i < 100; ++i) values.push_back(1.0f);
  const FcmResult fcm = fcm_cluster(values);
  // First pixel (value 0) should belong overwhelmingly to the lowest center.
  CHECK(fcm.memberships[0] > 0.9);
  // Last pixel (value 1) to the highest center.
  CHECK(fcm.memberships[(values.size() - 1) * 3 + 2] > 0.9);
}

TEST_CASE("assign_labels splits the value axis into three ordered bands") {
  std::vector<float> pixels;
  for (int i = 0; i < 100; ++i) pixels.push_back(0.05f);
  for (int i = 0; i < 100; ++i) pixels.push_back(0.50f);
  for (int i = 0; i < 100; ++i) pixels.push_back(0.95f);
  // Add spread so FCM has distinct values to work with.
  std::mt19937_64 rng(9);
  std::normal_distribution<float> jitter(0.0f, 0.01f);
  for (auto& v : pixels) v += jitter(rng);

  const DifferenceImage di = make_di(300, 1, pixels);
  const FcmResult fcm = fcm_cluster(di.pixels);
  const PseudoLabelMap labels = assign_labels(di, fcm);

  CHECK(labels.counts[0] == 100);
  CHECK(labels.counts[1] == 100);
  CHECK(labels.counts[2] == 100);
  CHECK(labels.at(0, 0) == PixelLabel::kUnchanged);
  CHECK(labels.at(0, 150) == PixelLabel::kIntermediate);
  CHECK(labels.at(0, 299) == PixelLabel::kChanged);
}

TEST_CASE("assign_labels ties go to the lower center") {
  // Hand-built FCM result with equal memberships for one pixel.
  FcmResult fcm;
  fcm.clusters = 3;
  fcm.centers = {0.1, 0.5, 0.9};
  fcm.memberships = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  const DifferenceImage di = make_di(1, 1, {0.5f});
  const PseudoLabelMap labels = assign_labels(di, fcm);
  CHECK(labels.at(0, 0) == PixelLabel::kUnchanged);
}

TEST_CASE("assign_labels rejects non-three-cluster results") {
  FcmResult fcm;
  fcm.clusters = 2;
  fcm.centers = {0.2, 0.8};
  fcm.memberships = {0.5, 0.5};
  const DifferenceImage di = make_di(1, 1, {0.5f});
  CHECK_THROWS_AS(assign_labels(di, fcm), config_error);
}

namespace {

PseudoLabelMap synthetic_labels(std::size_t changed, std::size_t unchanged,
                                std::size_t intermediate) {
  PseudoLabelMap map;
  map.width = changed + unchanged + intermediate;
  map.height = 1;
  for (std::size_t i = 0; i < changed; ++i)
    map.labels.push_back(PixelLabel::kChanged);
  for (std::size_t i = 0; i < unchanged; ++i)
    map.labels.push_back(PixelLabel::kUnchanged);
  for (std::size_t i = 0; i < intermediate; ++i)
    map.labels.push_back(PixelLabel::kIntermediate);
  map.counts = {unchanged, intermediate, changed};
  return map;
}

}  // namespace

TEST_CASE("select_samples caps each class and never picks intermediate") {
  const PseudoLabelMap labels = synthetic_labels(1000, 800, 500);
  const SampleSet set = select_samples(labels, 600, 1);
  std::size_t changed = 0, unchanged = 0;
  for (const Sample& s : set.samples) {
    if (s.label == 1) {
      ++changed;
    } else {
      ++unchanged;
    }
    CHECK(labels.at(s.row, s.col) != PixelLabel::kIntermediate);
  }
  CHECK(changed == 600);
  CHECK(unchanged == 600);
}

TEST_CASE("select_samples takes whole classes under the cap") {
  const PseudoLabelMap labels = synthetic_labels(1000, 800, 0);
  const SampleSet set = select_samples(labels, 8000, 2);
  std::size_t changed = 0, unchanged = 0;
  for (const Sample& s : set.samples) {
    (s.label == 1 ? changed : unchanged) += 1;
  }
  CHECK(changed == 1000);
  CHECK(unchanged == 800);
}

TEST_CASE("select_samples draws without replacement") {
  const PseudoLabelMap labels = synthetic_labels(100, 100, 0);
  const SampleSet set = select_samples(labels, 80, 3);
  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (const Sample& s : set.samples) coords.emplace_back(s.row, s.col);
  std::sort(coords.begin(), coords.end());
  CHECK(std::adjacent_find(coords.begin(), coords.end()) == coords.end());
}

TEST_CASE("select_samples is deterministic per seed") {
  const PseudoLabelMap labels = synthetic_labels(500, 500, 100);
  const SampleSet a = select_samples(labels, 200, 42);
  const SampleSet b = select_samples(labels, 200, 42);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].row == b.samples[i].row);
    CHECK(a.samples[i].col == b.samples[i].col);
    CHECK(a.samples[i].label == b.samples[i].label);
  }
  const SampleSet c = select_samples(labels, 200, 43);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.samples.size() && !any_diff; ++i) {
    any_diff = a.samples[i].row != c.samples[i].row ||
               a.samples[i].col != c.samples[i].col;
  }
  CHECK(any_diff);
}

TEST_CASE("select_samples requires 10 pixels in each class") {
  const PseudoLabelMap labels = synthetic_labels(5, 1000, 0);
  CHECK_THROWS_AS(select_samples(labels, 100, 1), degenerate_input_error);
}
