#pragma once

#include "auraseg/feature_map.hpp"

#include <torch/torch.h>

#include <vector>

namespace auraseg {

struct LossParams {
  double alpha = 0.25;     // focal class balance, in (0, 1)
  double gamma = 2.0;      // focal focusing exponent
  double lambda1 = 1.0;    // dice weight
  double lambda2 = 1.0;    // focal weight
  double aux_weight = 0.0; // decoder-stage supervision; 0 leaves aux heads observe-only
  double epsilon = 1e-6;   // dice smoothing and focal probability clamp

  bool operator==(const LossParams&) const = default;
};

/// Throws ConfigError when a weight is negative or non-finite, or alpha is outside (0, 1).
void validate_loss_params(const LossParams& params);

/// 1 - (2 sum(p g) + eps) / (sum(p^2) + sum(g^2) + eps), summed over every
/// element of the batch. Returns a 0-dim tensor that carries gradients.
torch::Tensor dice_loss(const torch::Tensor& probs, const torch::Tensor& target, double epsilon = 1e-6);

/// Mean over all pixels of
///   -alpha g (1-p)^gamma log p - (1-alpha)(1-g) p^gamma log(1-p),
/// with p clamped to [eps, 1 - eps] before the logs.
torch::Tensor focal_loss(const torch::Tensor& probs, const torch::Tensor& target, double alpha, double gamma,
                         double epsilon = 1e-6);

struct LossBreakdown {
  torch::Tensor total;  // differentiable scalar
  double dice = 0.0;    // on the final probabilities
  double focal = 0.0;
  double aux = 0.0;     // weighted sum of the per-stage terms (0 when aux_weight is 0)
  std::vector<double> aux_per_stage;  // unweighted lambda1*dice + lambda2*focal per stage
};

/// lambda1 * dice + lambda2 * focal on final_prob, plus aux_weight times the
/// same combination on sigmoid(aux_logits) against the target resized
/// (nearest) to each stage resolution. Aux terms are skipped entirely when
/// aux_weight is 0.
LossBreakdown total_loss(const SegmentationOutput& out, const torch::Tensor& target, const LossParams& params);

}  // namespace auraseg
