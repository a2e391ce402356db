#include "auraseg/metrics.hpp"

#include "auraseg/errors.hpp"

#include <json.hpp>

#include <algorithm>

namespace auraseg {

namespace {

void check_binary(const torch::Tensor& mask, const char* name) {
  if (!mask.eq(0).logical_or(mask.eq(1)).all().item<bool>()) {
    throw ValueError(std::string("confusion: ") + name + " mask is not binary");
  }
}

double ratio(int64_t num, int64_t den, bool both_empty) {
  if (den == 0) return both_empty ? 1.0 : 0.0;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::vector<double> sorted_values(const torch::Tensor& values) {
  auto flat = values.to(torch::kFloat64).contiguous().flatten();
  std::vector<double> out(flat.data_ptr<double>(), flat.data_ptr<double>() + flat.numel());
  std::sort(out.begin(), out.end());
  return out;
}

nlohmann::json counts_json(const ConfusionCounts& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
}

nlohmann::json metrics_json(const SegmentationMetrics& m) {
  return {{"iou_fg", m.iou_fg}, {"iou_bg", m.iou_bg}, {"miou", m.miou},
          {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
}

}  // namespace

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& other) noexcept {
  tp += other.tp;
  fp += other.fp;
  fn += other.fn;
  tn += other.tn;
  return *this;
}

ConfusionCounts confusion(const torch::Tensor& pred, const torch::Tensor& gt) {
  if (pred.sizes() != gt.sizes()) throw ShapeError("confusion: prediction and ground-truth shapes differ");
  check_binary(pred, "prediction");
  check_binary(gt, "ground-truth");
  const auto p = pred.ne(0);
  const auto g = gt.ne(0);
  ConfusionCounts c;
  c.tp = p.logical_and(g).sum().item<int64_t>();
  c.fp = p.logical_and(g.logical_not()).sum().item<int64_t>();
  c.fn = p.logical_not().logical_and(g).sum().item<int64_t>();
  c.tn = pred.numel() - c.tp - c.fp - c.fn;
  return c;
}

SegmentationMetrics compute_metrics(const ConfusionCounts& c) {
  const bool gt_fg_empty = c.tp + c.fn == 0;
  const bool pred_fg_empty = c.tp + c.fp == 0;
  const bool gt_bg_empty = c.tn + c.fp == 0;
  const bool pred_bg_empty = c.tn + c.fn == 0;

  SegmentationMetrics m;
  m.iou_fg = ratio(c.tp, c.tp + c.fp + c.fn, gt_fg_empty && pred_fg_empty);
  m.iou_bg = ratio(c.tn, c.tn + c.fp + c.fn, gt_bg_empty && pred_bg_empty);
  m.miou = 0.5 * (m.iou_fg + m.iou_bg);
  m.precision = ratio(c.tp, c.tp + c.fp, pred_fg_empty && gt_fg_empty);
  m.recall = ratio(c.tp, c.tp + c.fn, gt_fg_empty && pred_fg_empty);
  const double pr = m.precision + m.recall;
  m.f1 = pr > 0.0 ? 2.0 * m.precision * m.recall / pr : 0.0;
  return m;
}

std::vector<double> default_thresholds(int count) {
  std::vector<double> out;
  out.reserve(static_cast<size_t>(count));
  for (int k = 1; k <= count; ++k) out.push_back(static_cast<double>(k) / (count + 1));
  return out;
}

torch::Tensor binarize(const torch::Tensor& probs, double threshold) { return probs.gt(threshold).to(torch::kUInt8); }

MaxFAccumulator::MaxFAccumulator(std::vector<double> thresholds)
    : thresholds_(std::move(thresholds)), counts_(thresholds_.size()) {
  for (double t : thresholds_) {
    if (!(t > 0.0 && t < 1.0)) throw ValueError("max-F thresholds must lie in (0, 1)");
  }
}

void MaxFAccumulator::add(const torch::Tensor& probs, const torch::Tensor& gt) {
  if (probs.sizes() != gt.sizes()) throw ShapeError("max-F: probability and ground-truth shapes differ");
  const auto fg_mask = gt.ne(0);
  const auto fg = sorted_values(probs.masked_select(fg_mask));
  const auto bg = sorted_values(probs.masked_select(fg_mask.logical_not()));
  const auto n_fg = static_cast<int64_t>(fg.size());
  const auto n_bg = static_cast<int64_t>(bg.size());
  for (size_t i = 0; i < thresholds_.size(); ++i) {
    const double t = thresholds_[i];
    // Values <= t are background predictions.
    const int64_t fg_below = std::upper_bound(fg.begin(), fg.end(), t) - fg.begin();
    const int64_t bg_below = std::upper_bound(bg.begin(), bg.end(), t) - bg.begin();
    ConfusionCounts c;
    c.tp = n_fg - fg_below;
    c.fn = fg_below;
    c.fp = n_bg - bg_below;
    c.tn = bg_below;
    counts_[i] += c;
  }
}

MaxFResult MaxFAccumulator::result() const {
  MaxFResult best;
  bool first = true;
  for (size_t i = 0; i < thresholds_.size(); ++i) {
    const double f = compute_metrics(counts_[i]).f1;
    if (first || f > best.max_f) {
      best = {f, thresholds_[i]};
      first = false;
    }
  }
  return best;
}

MaxFResult max_f_score(const torch::Tensor& probs, const torch::Tensor& gt, const std::vector<double>& thresholds) {
  MaxFAccumulator acc(thresholds);
  acc.add(probs, gt);
  return acc.result();
}

MetricsAccumulator::MetricsAccumulator(double threshold, std::vector<double> sweep)
    : threshold_(threshold), sweep_(std::move(sweep)) {}

void MetricsAccumulator::add_image(const std::string& id, const torch::Tensor& probs, const torch::Tensor& gt) {
  ImageMetrics image;
  image.id = id;
  image.counts = confusion(binarize(probs, threshold_), gt);
  image.metrics = compute_metrics(image.counts);
  images_.push_back(std::move(image));
  sweep_.add(probs, gt);
}

MetricsReport MetricsAccumulator::report() const {
  MetricsReport report;
  report.threshold = threshold_;
  report.per_image = images_;
  for (const auto& image : images_) report.total += image.counts;
  report.aggregate = compute_metrics(report.total);
  report.max_f = sweep_.result();
  return report;
}

std::string MetricsReport::to_jsonl() const {
  std::string out;
  nlohmann::json header = {{"record", "header"},
                           {"aggregation", "micro (confusion counts summed over images)"},
                           {"miou", "mean of foreground and background IoU"},
                           {"threshold", threshold},
                           {"images", per_image.size()}};
  out += header.dump() + "\n";
  for (const auto& image : per_image) {
    nlohmann::json record = metrics_json(image.metrics);
    record["record"] = "image";
    record["id"] = image.id;
    record["counts"] = counts_json(image.counts);
    out += record.dump() + "\n";
  }
  nlohmann::json agg = metrics_json(aggregate);
  agg["record"] = "aggregate";
  agg["counts"] = counts_json(total);
  agg["max_f"] = max_f.max_f;
  agg["max_f_threshold"] = max_f.threshold;
  out += agg.dump() + "\n";
  return out;
}

}  // namespace auraseg
