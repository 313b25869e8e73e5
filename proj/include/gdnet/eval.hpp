#pragma once

#include <cstdint>
#include <string>

#include "gdnet/model.hpp"
#include "gdnet/patches.hpp"
#include "gdnet/sar_image.hpp"

namespace gdnet {

struct MetricsReport {
  std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
  double oe_percent = 0.0;   // (FP+FN)/N * 100
  double pcc_percent = 0.0;  // 100 - OE
  double kc_percent = 0.0;   // Cohen's kappa * 100
};

// Argmax classification of every pixel's 3*r*r patch; ties go to "unchanged".
ChangeMap predict_map(GDNet<float>& model, const PaddedScene& scene);

struct ConfusionCounts {
  std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
};

// "Changed" is the positive class.
ConfusionCounts confusion_counts(const ChangeMap& pred, const ChangeMap& gt);

// KC = (p_o - p_e)/(1 - p_e) with
// p_e = [(TP+FP)(TP+FN) + (FN+TN)(FP+TN)] / N^2; defined as 0 when the
// denominator vanishes (all pixels one class in both maps).
MetricsReport compute_metrics(std::uint64_t tp, std::uint64_t tn,
                              std::uint64_t fp, std::uint64_t fn);

// One-line CSV plus a key-value block, 4 decimal places; the file identity
// oe + pcc = 100.0000 is preserved through rounding.
void write_report(const MetricsReport& report, const std::string& path);

MetricsReport read_report(const std::string& path);

}  // namespace gdnet
