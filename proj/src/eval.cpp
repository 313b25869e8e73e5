#include "gdnet/eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gdnet/errors.hpp"

namespace gdnet {

ChangeMap predict_map(GDNet<float>& model, const PaddedScene& scene) {
  const std::size_t r = model.config.r;
  const std::size_t w = scene.width, h = scene.height;
  if (w < r || h < r) {
    throw dimension_error("predict_map: image smaller than the patch size");
  }

  ChangeMap map;
  map.width = w;
  map.height = h;
  map.cells.resize(w * h);

  constexpr std::size_t kChunk = 512;
  Tensor batch({kChunk, 3, r, r});
  const std::size_t total = w * h;
  for (std::size_t start = 0; start < total; start += kChunk) {
    const std::size_t b = std::min(kChunk, total - start);
    Tensor* in = &batch;
    Tensor tail;
    if (b != kChunk) {
      tail = Tensor({b, 3, r, r});
      in = &tail;
    }
    for (std::size_t i = 0; i < b; ++i) {
      const std::size_t p = start + i;
      extract_patch_into(scene, p / w, p % w, r, in->data() + i * 3 * r * r);
    }
    ForwardResult<float> fwd = model.forward(*in);
    for (std::size_t i = 0; i < b; ++i) {
      map.cells[start + i] =
          fwd.logits.at2(i, 1) > fwd.logits.at2(i, 0) ? 1 : 0;
    }
  }
  return map;
}

ConfusionCounts confusion_counts(const ChangeMap& pred, const ChangeMap& gt) {
  if (pred.width != gt.width || pred.height != gt.height) {
    throw dimension_error("confusion_counts: map dimensions differ");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < pred.cells.size(); ++i) {
    if (gt.cells[i]) {
      pred.cells[i] ? ++c.tp : ++c.fn;
    } else {
      pred.cells[i] ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

MetricsReport compute_metrics(std::uint64_t tp, std::uint64_t tn,
                              std::uint64_t fp, std::uint64_t fn) {
  const std::uint64_t n = tp + tn + fp + fn;
  if (n == 0) throw config_error("compute_metrics: no pixels");
  MetricsReport rep;
  rep.tp = tp;
  rep.tn = tn;
  rep.fp = fp;
  rep.fn = fn;
  const double nd = static_cast<double>(n);
  const double oe = static_cast<double>(fp + fn) / nd;
  rep.oe_percent = oe * 100.0;
  rep.pcc_percent = 100.0 - rep.oe_percent;

  const double p_o = 1.0 - oe;
  const double p_e =
      (static_cast<double>(tp + fp) * static_cast<double>(tp + fn) +
       static_cast<double>(fn + tn) * static_cast<double>(fp + tn)) /
      (nd * nd);
  rep.kc_percent = (1.0 - p_e) == 0.0 ? 0.0 : (p_o - p_e) / (1.0 - p_e) * 100.0;
  return rep;
}

void write_report(const MetricsReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write report: " + path);
  // Round OE once and derive PCC from it so the pair still sums to 100.0000.
  const double oe_r = std::round(report.oe_percent * 1e4) / 1e4;
  const double pcc_r = 100.0 - oe_r;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%llu,%llu,%llu,%llu,%.4f,%.4f,%.4f",
                static_cast<unsigned long long>(report.tp),
                static_cast<unsigned long long>(report.tn),
                static_cast<unsigned long long>(report.fp),
                static_cast<unsigned long long>(report.fn), oe_r, pcc_r,
                report.kc_percent);
  out << "tp,tn,fp,fn,oe_percent,pcc_percent,kc_percent\n" << buf << "\n\n";
  out << "tp = " << report.tp << "\n";
  out << "tn = " << report.tn << "\n";
  out << "fp = " << report.fp << "\n";
  out << "fn = " << report.fn << "\n";
  std::snprintf(buf, sizeof(buf), "oe_percent = %.4f\npcc_percent = %.4f\nkc_percent = %.4f\n",
                oe_r, pcc_r, report.kc_percent);
  out << buf;
  if (!out) throw io_error("report write failed: " + path);
}

MetricsReport read_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open report: " + path);
  std::string header, csv;
  if (!std::getline(in, header) || !std::getline(in, csv)) {
    throw format_error("truncated report: " + path);
  }
  MetricsReport rep;
  std::istringstream ls(csv);
  std::string field;
  double vals[7];
  for (int i = 0; i < 7; ++i) {
    if (!std::getline(ls, field, ',')) {
      throw format_error("bad report csv line: " + path);
    }
    vals[i] = std::stod(field);
  }
  rep.tp = static_cast<std::uint64_t>(vals[0]);
  rep.tn = static_cast<std::uint64_t>(vals[1]);
  rep.fp = static_cast<std::uint64_t>(vals[2]);
  rep.fn = static_cast<std::uint64_t>(vals[3]);
  rep.oe_percent = vals[4];
  rep.pcc_percent = vals[5];
  rep.kc_percent = vals[6];
  return rep;
}

}  // namespace gdnet
