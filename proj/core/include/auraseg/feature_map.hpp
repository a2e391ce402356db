#pragma once

#include <torch/torch.h>

#include <array>
#include <optional>
#include <string_view>
#include <vector>

namespace auraseg {

// Activations travel between modules as plain [batch, channels, height, width]
// tensors; the helpers below assert that layout at module boundaries.
using FeatureMap = torch::Tensor;

inline constexpr std::array<int, 5> kEncoderStrides{2, 4, 8, 16, 32};
inline constexpr int kMaxStride = 32;

enum class Precision { Float32, Float64 };

torch::Dtype dtype_of(Precision precision);
std::string_view to_string(Precision precision);
Precision parse_precision(std::string_view text);

/// Throws ShapeError unless `x` is a 4-D map with every dimension >= 1.
void check_feature_map(const FeatureMap& x, std::string_view where);
void check_channels(const FeatureMap& x, int64_t channels, std::string_view where);
void check_spatial(const FeatureMap& x, int64_t height, int64_t width, std::string_view where);
/// Spatial dims must both be divisible by `divisor`.
void check_divisible(const FeatureMap& x, int64_t divisor, std::string_view where);

struct PyramidLevel {
  int stride = 0;
  FeatureMap map;
};

// Encoder outputs ordered by increasing stride.
struct FeaturePyramid {
  std::vector<PyramidLevel> levels;

  const FeatureMap& at_stride(int stride) const;
  const FeatureMap& deepest() const { return levels.back().map; }
  std::vector<int> strides() const;

  /// Checks strides are strictly increasing and every level has spatial dims
  /// input/stride exactly and the given channel counts.
  void validate(int64_t input_height, int64_t input_width,
                const std::vector<int>& channels) const;
};

struct SegmentationOutput {
  FeatureMap final_prob;                    // sigmoid of the final logits, [B, classes, H, W]
  FeatureMap coarse_logits;                 // decoder (or fallback head) output
  std::optional<FeatureMap> refined_logits; // set when boundary refinement is enabled
  std::vector<FeatureMap> aux_logits;       // one per decoder stage, deep to shallow

  const FeatureMap& final_logits() const {
    return refined_logits ? *refined_logits : coarse_logits;
  }
};

}  // namespace auraseg
