#pragma once

#include "auraseg/feature_map.hpp"
#include "auraseg/layers.hpp"
#include "auraseg/model_config.hpp"

#include <torch/torch.h>

#include <cstdint>
#include <vector>

namespace auraseg {

struct RbrmSpec {
  int depth = 4;
  int base_channels = 16;
  int in_channels = 1;
  int out_channels = 1;

  /// Width at each resolution level, full resolution first: base, then base * 2^(l-1).
  std::vector<int> level_channels() const;
};

// Residual boundary refinement: a small encoder-decoder over the coarse
// logits. The encoder halves resolution `depth` times with stride-2 convs; the
// decoder upsamples bilinearly, convolves, and adds the matching encoder
// feature at every level. A 1x1 head (zero-initialized) produces a residual
// that is added to the coarse logits.
class RbrmImpl : public torch::nn::Module {
 public:
  explicit RbrmImpl(const RbrmSpec& spec);

  FeatureMap forward(const FeatureMap& coarse_logits);
  /// The additive correction alone.
  FeatureMap residual(const FeatureMap& coarse_logits);

  const RbrmSpec& spec() const noexcept { return spec_; }

  ConvBnRelu entry{nullptr};
  std::vector<ConvBnRelu> down;
  ConvBnRelu bridge{nullptr};
  std::vector<ConvBnRelu> up;
  torch::nn::Conv2d head{nullptr};

 private:
  RbrmSpec spec_;
};
TORCH_MODULE(Rbrm);

RbrmSpec rbrm_spec_from(const ValidatedConfig& cfg);

struct BoundaryErrorCounts {
  int64_t errors = 0;          // misclassified pixels
  int64_t errors_in_band = 0;  // ... lying within the radius of a ground-truth boundary
  int64_t band_pixels = 0;
  int64_t pixels = 0;

  double fraction() const {
    return errors == 0 ? 0.0 : static_cast<double>(errors_in_band) / static_cast<double>(errors);
  }
  BoundaryErrorCounts& operator+=(const BoundaryErrorCounts& other);
};

/// Boundary pixels have at least one 4-neighbour with a different label. The
/// band is every pixel within Euclidean distance `radius` of a boundary pixel.
/// Masks are [..., H, W] with values 0/1; leading dims are treated as a batch.
BoundaryErrorCounts boundary_error_counts(const torch::Tensor& pred_mask, const torch::Tensor& gt_mask, int radius);

/// Fraction of misclassified pixels that fall inside the boundary band (0 when
/// there are no errors).
double boundary_error_map(const torch::Tensor& pred_mask, const torch::Tensor& gt_mask, int radius);

}  // namespace auraseg
