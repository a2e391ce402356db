#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <string>
#include <vector>

namespace auraseg {

struct ConfusionCounts {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;
  int64_t tn = 0;

  int64_t total() const noexcept { return tp + fp + fn + tn; }
  ConfusionCounts& operator+=(const ConfusionCounts& other) noexcept;
  bool operator==(const ConfusionCounts&) const = default;
};

/// Pixel counts for binary masks of equal shape. Throws ShapeError on a shape
/// mismatch and ValueError if either mask holds values other than 0 and 1.
ConfusionCounts confusion(const torch::Tensor& pred, const torch::Tensor& gt);

struct SegmentationMetrics {
  double iou_fg = 0.0;
  double iou_bg = 0.0;
  double miou = 0.0;  // mean of foreground and background IoU
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// A ratio with a zero denominator is 1 when the prediction and ground-truth
// sets it compares are both empty, and 0 otherwise. F1 is 0 when P + R is 0.
SegmentationMetrics compute_metrics(const ConfusionCounts& counts);

/// `count` thresholds evenly spaced strictly inside (0, 1): k / (count + 1).
std::vector<double> default_thresholds(int count = 255);

/// Binarization rule shared by evaluation and inference: foreground iff p > threshold.
torch::Tensor binarize(const torch::Tensor& probs, double threshold);

struct MaxFResult {
  double max_f = 0.0;
  double threshold = 0.0;  // first threshold attaining max_f
};

// Accumulates confusion counts at every threshold of a grid across images, so
// F1 is computed on dataset-level counts before taking the maximum.
class MaxFAccumulator {
 public:
  explicit MaxFAccumulator(std::vector<double> thresholds = default_thresholds());

  void add(const torch::Tensor& probs, const torch::Tensor& gt);
  MaxFResult result() const;

  const std::vector<double>& thresholds() const noexcept { return thresholds_; }
  const std::vector<ConfusionCounts>& counts() const noexcept { return counts_; }

 private:
  std::vector<double> thresholds_;
  std::vector<ConfusionCounts> counts_;
};

MaxFResult max_f_score(const torch::Tensor& probs, const torch::Tensor& gt,
                       const std::vector<double>& thresholds = default_thresholds());

struct ImageMetrics {
  std::string id;
  ConfusionCounts counts;
  SegmentationMetrics metrics;
};

struct MetricsReport {
  double threshold = 0.5;
  std::vector<ImageMetrics> per_image;
  ConfusionCounts total;          // summed over images (micro-averaged)
  SegmentationMetrics aggregate;  // computed from `total`
  MaxFResult max_f;

  /// Line-delimited JSON: a header record, one record per image, then the aggregate.
  std::string to_jsonl() const;
};

class MetricsAccumulator {
 public:
  explicit MetricsAccumulator(double threshold = 0.5, std::vector<double> sweep = default_thresholds());

  /// `probs` and `gt` are one image ([H, W] or [1, H, W]).
  void add_image(const std::string& id, const torch::Tensor& probs, const torch::Tensor& gt);
  MetricsReport report() const;

 private:
  double threshold_;
  MaxFAccumulator sweep_;
  std::vector<ImageMetrics> images_;
};

}  // namespace auraseg
