#pragma once

#include "auraseg/feature_map.hpp"
#include "auraseg/layers.hpp"
#include "auraseg/model_config.hpp"

#include <torch/torch.h>

#include <vector>

namespace auraseg {

/// Bottleneck width of the excitation MLP: max(channels / reduction, 4).
int64_t se_reduced_channels(int64_t channels, int64_t reduction);

// Squeeze-and-excitation: g = sigmoid(W2 relu(W1 GAP(x))), output x * g with g
// broadcast over space. The MLP is expressed as 1x1 convs on the pooled map.
class SeAttentionImpl : public torch::nn::Module {
 public:
  SeAttentionImpl(int64_t channels, int64_t reduction = 16);

  FeatureMap forward(const FeatureMap& x);
  /// Per-channel gates, [B, C, 1, 1], each strictly inside (0, 1).
  FeatureMap gates(const FeatureMap& x);

  torch::nn::Conv2d squeeze{nullptr};
  torch::nn::Conv2d excite{nullptr};

 private:
  int64_t channels_;
};
TORCH_MODULE(SeAttention);

// Spatial attention: m = sigmoid(conv_k(concat(channel max, channel mean))),
// output x * m with m broadcast over channels.
class SpatialAttentionImpl : public torch::nn::Module {
 public:
  explicit SpatialAttentionImpl(int64_t kernel_size = 7);

  FeatureMap forward(const FeatureMap& x);
  /// Single-channel mask, [B, 1, H, W].
  FeatureMap mask(const FeatureMap& x);

  torch::nn::Conv2d conv{nullptr};
};
TORCH_MODULE(SpatialAttention);

struct ApudStageSpec {
  int in_channels = 0;
  int skip_channels = 0;
  int out_channels = 0;
  int se_reduction = 16;
  int spatial_kernel = 7;
  int num_classes = 1;
};

struct ApudStageOutput {
  FeatureMap features;    // [B, out, 2h, 2w]
  FeatureMap aux_logits;  // [B, classes, 2h, 2w]
};

// One decoder step: project the deeper map (1x1) and upsample it 2x, project
// the encoder skip (1x1), sum, then SE attention, spatial attention and a
// 3x3 conv + BN + ReLU. An auxiliary 1x1 head reads the stage output.
class ApudStageImpl : public torch::nn::Module {
 public:
  explicit ApudStageImpl(const ApudStageSpec& spec);

  ApudStageOutput forward(const FeatureMap& below, const FeatureMap& skip);

  const ApudStageSpec& spec() const noexcept { return spec_; }

  ConvBnRelu project_below{nullptr};
  ConvBnRelu project_skip{nullptr};
  SeAttention se{nullptr};
  SpatialAttention spatial{nullptr};
  ConvBnRelu refine{nullptr};
  torch::nn::Conv2d aux_head{nullptr};

 private:
  ApudStageSpec spec_;
};
TORCH_MODULE(ApudStage);

struct ApudOutput {
  FeatureMap coarse_logits;           // full input resolution
  std::vector<FeatureMap> aux_logits; // deep to shallow
};

struct ApudSpec {
  int context_channels = 512;
  std::vector<int> skip_channels;    // encoder levels at strides 16, 8, 4, 2
  std::vector<int> stage_channels;   // deep to shallow
  int se_reduction = 16;
  int spatial_kernel = 7;
  int num_classes = 1;
};

// Attention progressive upsampling decoder: a chain of stages from stride 32
// down to stride 2, then a 1x1 logits head and a final 2x bilinear upsample.
class ApudImpl : public torch::nn::Module {
 public:
  explicit ApudImpl(const ApudSpec& spec);

  ApudOutput forward(const FeaturePyramid& pyramid, const FeatureMap& context);

  std::vector<ApudStage> stages;
  torch::nn::Conv2d head{nullptr};

 private:
  ApudSpec spec_;
};
TORCH_MODULE(Apud);

ApudSpec apud_spec_from(const ValidatedConfig& cfg);

}  // namespace auraseg
