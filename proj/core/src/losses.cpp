#include "auraseg/losses.hpp"

#include "auraseg/errors.hpp"
#include "auraseg/layers.hpp"

#include <cmath>

namespace auraseg {

namespace {

void check_same_shape(const torch::Tensor& probs, const torch::Tensor& target, const char* where) {
  if (!probs.defined() || !target.defined() || probs.sizes() != target.sizes()) {
    throw ShapeError(std::string(where) + ": prediction and target shapes differ");
  }
}

torch::Tensor weighted_pair(const torch::Tensor& probs, const torch::Tensor& target, const LossParams& params,
                            double* dice_out, double* focal_out) {
  torch::Tensor combined = torch::zeros({}, probs.options());
  if (params.lambda1 != 0.0 || dice_out) {
    auto dice = dice_loss(probs, target, params.epsilon);
    if (dice_out) *dice_out = dice.item<double>();
    if (params.lambda1 != 0.0) combined = combined + params.lambda1 * dice;
  }
  if (params.lambda2 != 0.0 || focal_out) {
    auto focal = focal_loss(probs, target, params.alpha, params.gamma, params.epsilon);
    if (focal_out) *focal_out = focal.item<double>();
    if (params.lambda2 != 0.0) combined = combined + params.lambda2 * focal;
  }
  return combined;
}

}  // namespace

void validate_loss_params(const LossParams& p) {
  auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!(p.alpha > 0.0 && p.alpha < 1.0)) throw ConfigError("loss.alpha must lie in (0, 1)");
  if (!finite_nonneg(p.gamma)) throw ConfigError("loss.gamma must be finite and >= 0");
  if (!finite_nonneg(p.lambda1)) throw ConfigError("loss.lambda1 must be finite and >= 0");
  if (!finite_nonneg(p.lambda2)) throw ConfigError("loss.lambda2 must be finite and >= 0");
  if (!finite_nonneg(p.aux_weight)) throw ConfigError("loss.aux_weight must be finite and >= 0");
  if (!(p.epsilon > 0.0 && p.epsilon < 0.5)) throw ConfigError("loss.epsilon must lie in (0, 0.5)");
}

torch::Tensor dice_loss(const torch::Tensor& probs, const torch::Tensor& target, double epsilon) {
  check_same_shape(probs, target, "dice loss");
  const auto g = target.to(probs.dtype());
  const auto overlap = (probs * g).sum();
  const auto denom = probs.square().sum() + g.square().sum();
  return 1.0 - (2.0 * overlap + epsilon) / (denom + epsilon);
}

torch::Tensor focal_loss(const torch::Tensor& probs, const torch::Tensor& target, double alpha, double gamma,
                         double epsilon) {
  check_same_shape(probs, target, "focal loss");
  const auto g = target.to(probs.dtype());
  const auto p = probs.clamp(epsilon, 1.0 - epsilon);
  const auto positive = -alpha * g * (1.0 - p).pow(gamma) * p.log();
  const auto negative = -(1.0 - alpha) * (1.0 - g) * p.pow(gamma) * (1.0 - p).log();
  return (positive + negative).mean();
}

LossBreakdown total_loss(const SegmentationOutput& out, const torch::Tensor& target, const LossParams& params) {
  check_same_shape(out.final_prob, target, "total loss");
  LossBreakdown result;
  result.total = weighted_pair(out.final_prob, target, params, &result.dice, &result.focal);

  if (params.aux_weight != 0.0 && !out.aux_logits.empty()) {
    torch::Tensor aux_sum = torch::zeros({}, out.final_prob.options());
    const auto target_real = target.to(out.final_prob.dtype());
    for (const auto& logits : out.aux_logits) {
      check_feature_map(logits, "aux logits");
      const auto stage_target = ops::downsample_nearest(target_real, logits.size(2), logits.size(3));
      auto stage = weighted_pair(torch::sigmoid(logits), stage_target, params, nullptr, nullptr);
      result.aux_per_stage.push_back(stage.item<double>());
      aux_sum = aux_sum + stage;
    }
    result.aux = params.aux_weight * aux_sum.item<double>();
    result.total = result.total + params.aux_weight * aux_sum;
  }
  return result;
}

}  // namespace auraseg
