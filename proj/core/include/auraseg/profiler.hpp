#pragma once

#include "auraseg/flops.hpp"
#include "auraseg/model.hpp"
#include "auraseg/model_config.hpp"

#include <torch/torch.h>

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace auraseg {

struct ParameterReport {
  std::map<std::string, int64_t> per_module;  // keyed by top-level submodule name
  int64_t total = 0;
};

/// Exact learnable-parameter tally grouped by the first component of each
/// parameter's hierarchical name (batch-norm running statistics are buffers
/// and do not count).
ParameterReport count_parameters(const torch::nn::Module& model);

/// Runs `forward` under a flops::Recorder and returns the breakdown.
flops::Breakdown count_flops(const std::function<void()>& forward);
/// Single-image eval-mode forward at the given input size.
flops::Breakdown count_flops(AuraSeg& model, int64_t height, int64_t width);

struct FpsReport {
  double mean_fps = 0.0;
  double p50_ms = 0.0;   // latency percentiles
  double p95_ms = 0.0;
  double p50_fps = 0.0;  // 1000 / p50_ms
  int iters = 0;
  int warmup = 0;
  std::string hardware;
};

/// Wall-clock single-image (batch 1) eval-mode forward passes. Assumes the
/// process is otherwise idle. Throws ValueError when iters < 10.
FpsReport measure_fps(AuraSeg& model, int64_t height, int64_t width, int warmup = 3, int iters = 10);

/// CPU model name and torch thread count.
std::string hardware_descriptor();

struct AblationRow {
  std::string variant;
  ModelConfig config;
  int64_t params = 0;
  double fps = 0.0;
  double gflops = 0.0;
  std::map<std::string, int64_t> flops_per_module;
  std::map<std::string, int64_t> params_per_module;
  double toy_miou = -1.0;  // negative when not trained
};

/// The four cumulative variants: base, +ASPP-Lite, +APUD, +RBRM. Every flag
/// in `base` other than the three switches is kept.
std::vector<std::pair<std::string, ModelConfig>> ablation_variants(const ModelConfig& base);

struct AblationOptions {
  bool measure_fps = true;
  int fps_warmup = 2;
  int fps_iters = 10;
  uint64_t seed = 0;
};

std::vector<AblationRow> run_ablation(const ModelConfig& base, const AblationOptions& options = {});

/// Aligned text table with columns Variant / Params / FPS / GFLOPs (+ toy mIoU when present).
std::string format_ablation_table(const std::vector<AblationRow>& rows, int64_t height, int64_t width);
/// One JSON record per row.
std::string ablation_jsonl(const std::vector<AblationRow>& rows, int64_t height, int64_t width);

}  // namespace auraseg
