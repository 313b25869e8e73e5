#include "gdnet/preclassify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "gdnet/errors.hpp"

namespace gdnet {

namespace {

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

FcmResult fcm_cluster(const std::vector<float>& values,
                      const FcmOptions& options) {
  const std::size_t n = values.size();
  const std::size_t c = options.clusters;
  if (c < 2) throw config_error("fcm_cluster: need at least 2 clusters");
  if (options.fuzziness <= 1.0) {
    throw config_error("fcm_cluster: fuzziness must exceed 1");
  }

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  {
    std::size_t distinct = sorted.empty() ? 0 : 1;
    for (std::size_t i = 1; i < n && distinct < c; ++i) {
      if (sorted[i] != sorted[i - 1]) ++distinct;
    }
    if (distinct < c) {
      throw degenerate_input_error(
          "fcm_cluster: fewer distinct values than clusters");
    }
  }

  FcmResult result;
  result.clusters = c;
  result.centers.resize(c);
  for (std::size_t j = 0; j < c; ++j) {
    result.centers[j] = quantile(sorted, (2.0 * j + 1.0) / (2.0 * c));
  }

  const double expo = 2.0 / (options.fuzziness - 1.0);
  result.memberships.assign(n * c, 0.0);
  std::vector<double> dist(c);

  for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
    // Membership update from the frozen centers.
    for (std::size_t i = 0; i < n; ++i) {
      double* u = result.memberships.data() + i * c;
      std::size_t zero_count = 0;
      for (std::size_t j = 0; j < c; ++j) {
        dist[j] = std::abs(static_cast<double>(values[i]) - result.centers[j]);
        if (dist[j] == 0.0) ++zero_count;
      }
      if (zero_count > 0) {
        for (std::size_t j = 0; j < c; ++j) {
          u[j] = dist[j] == 0.0 ? 1.0 / static_cast<double>(zero_count) : 0.0;
        }
        continue;
      }
      double denom = 0.0;
      for (std::size_t j = 0; j < c; ++j) {
        u[j] = std::pow(1.0 / dist[j], expo);
        denom += u[j];
      }
      for (std::size_t j = 0; j < c; ++j) u[j] /= denom;
    }

    // Center update as membership-weighted means.
    std::vector<double> num(c, 0.0), den(c, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* u = result.memberships.data() + i * c;
      for (std::size_t j = 0; j < c; ++j) {
        const double um = std::pow(u[j], options.fuzziness);
        num[j] += um * static_cast<double>(values[i]);
        den[j] += um;
      }
    }
    double max_shift = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      const double next = den[j] > 0.0 ? num[j] / den[j] : result.centers[j];
      max_shift = std::max(max_shift, std::abs(next - result.centers[j]));
      result.centers[j] = next;
    }

    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double* u = result.memberships.data() + i * c;
      for (std::size_t j = 0; j < c; ++j) {
        const double d =
            static_cast<double>(values[i]) - result.centers[j];
        objective += std::pow(u[j], options.fuzziness) * d * d;
      }
    }
    result.objective_history.push_back(objective);

    if (max_shift < options.tol) break;
  }

  // Sort centers ascending and permute membership columns to match.
  std::vector<std::size_t> order(c);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return result.centers[a] < result.centers[b];
  });
  std::vector<double> centers(c);
  for (std::size_t j = 0; j < c; ++j) centers[j] = result.centers[order[j]];
  if (std::adjacent_find(centers.begin(), centers.end(),
                         [](double a, double b) { return a >= b; }) !=
      centers.end()) {
    throw degenerate_input_error("fcm_cluster: cluster centers collapsed");
  }
  std::vector<double> permuted(n * c);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      permuted[i * c + j] = result.memberships[i * c + order[j]];
    }
  }
  result.centers = std::move(centers);
  result.memberships = std::move(permuted);
  return result;
}

PseudoLabelMap assign_labels(const DifferenceImage& di, const FcmResult& fcm) {
  const std::size_t n = di.pixels.size();
  if (fcm.memberships.size() != n * fcm.clusters) {
    throw dimension_error("assign_labels: membership/pixel count mismatch");
  }
  if (fcm.clusters != 3) {
    throw config_error("assign_labels: expects exactly 3 clusters");
  }
  PseudoLabelMap map;
  map.width = di.width;
  map.height = di.height;
  map.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* u = fcm.memberships.data() + i * 3;
    std::size_t best = 0;
    for (std::size_t j = 1; j < 3; ++j) {
      if (u[j] > u[best]) best = j;  // strict: ties stay with lower center
    }
    // Cluster order is ascending by center: 0 -> unchanged, 1 -> intermediate,
    // 2 -> changed.
    map.labels[i] = static_cast<PixelLabel>(best);
    ++map.counts[best];
  }
  return map;
}

void write_label_map(const PseudoLabelMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write label map: " + path);
  out << "P5\n" << map.width << " " << map.height << "\n255\n";
  for (PixelLabel l : map.labels) {
    const std::uint8_t v = l == PixelLabel::kUnchanged ? 0
                           : l == PixelLabel::kIntermediate ? 128
                                                            : 255;
    out.put(static_cast<char>(v));
  }
  if (!out) throw io_error("write failed: " + path);
}

SampleSet select_samples(const PseudoLabelMap& labels,
                         std::size_t per_class_cap, std::uint64_t seed) {
  std::vector<std::pair<std::size_t, std::size_t>> changed, unchanged;
  for (std::size_t r = 0; r < labels.height; ++r) {
    for (std::size_t c = 0; c < labels.width; ++c) {
      switch (labels.at(r, c)) {
        case PixelLabel::kChanged:
          changed.emplace_back(r, c);
          break;
        case PixelLabel::kUnchanged:
          unchanged.emplace_back(r, c);
          break;
        case PixelLabel::kIntermediate:
          break;
      }
    }
  }
  if (changed.size() < 10 || unchanged.size() < 10) {
    throw degenerate_input_error(
        "select_samples: need at least 10 pixels per reliable class (changed=" +
        std::to_string(changed.size()) +
        ", unchanged=" + std::to_string(unchanged.size()) + ")");
  }

  std::mt19937_64 rng(seed);
  std::shuffle(changed.begin(), changed.end(), rng);
  std::shuffle(unchanged.begin(), unchanged.end(), rng);

  SampleSet set;
  set.seed = seed;
  const std::size_t n_pos = std::min(per_class_cap, changed.size());
  const std::size_t n_neg = std::min(per_class_cap, unchanged.size());
  set.samples.reserve(n_pos + n_neg);
  for (std::size_t i = 0; i < n_pos; ++i) {
    set.samples.push_back({changed[i].first, changed[i].second, 1});
  }
  for (std::size_t i = 0; i < n_neg; ++i) {
    set.samples.push_back({unchanged[i].first, unchanged[i].second, 0});
  }
  return set;
}

}  // namespace gdnet
