#pragma once

#include "auraseg/feature_map.hpp"
#include "auraseg/layers.hpp"
#include "auraseg/model_config.hpp"

#include <torch/torch.h>

#include <vector>

namespace auraseg {

/// Residual bottleneck: 1x1 then 3x3 conv, added back onto the input.
class BottleneckImpl : public torch::nn::Module {
 public:
  explicit BottleneckImpl(int64_t channels);
  FeatureMap forward(const FeatureMap& x);

  ConvBnRelu reduce{nullptr};
  ConvBnRelu conv{nullptr};
};
TORCH_MODULE(Bottleneck);

// Cross-stage-partial block. The input channels are split in half: the first
// half runs through the bottleneck chain, the second bypasses it, and the two
// are concatenated (processed half first) and fused by a 1x1 conv.
class CspBlockImpl : public torch::nn::Module {
 public:
  CspBlockImpl(int64_t in_channels, int64_t out_channels, int64_t num_blocks);
  FeatureMap forward(const FeatureMap& x);

  int64_t in_channels() const noexcept { return in_channels_; }
  int64_t out_channels() const noexcept { return out_channels_; }

  torch::nn::ModuleList bottlenecks;
  ConvBnRelu fuse{nullptr};

 private:
  int64_t in_channels_;
  int64_t out_channels_;
};
TORCH_MODULE(CspBlock);

struct CspStageSpec {
  int out_channels = 0;
  int num_blocks = 1;
};

struct BackboneOptions {
  int in_channels = 3;
  int stem_channels = 32;
  std::vector<CspStageSpec> stages;

  /// Throws ConfigError unless `channels` has one more entry than `blocks`.
  static BackboneOptions from_lists(int in_channels, const std::vector<int>& channels,
                                    const std::vector<int>& blocks);
};

// Stride-2 stem followed by CSP stages, each opening with a stride-2 3x3 conv.
// Produces one pyramid level per stride in kEncoderStrides.
class BackboneImpl : public torch::nn::Module {
 public:
  explicit BackboneImpl(const BackboneOptions& options);

  FeaturePyramid forward(const FeatureMap& x);

  /// Output channels per pyramid level, shallow to deep.
  const std::vector<int>& level_channels() const noexcept { return level_channels_; }

  ConvBnRelu stem{nullptr};
  std::vector<ConvBnRelu> downsamples;
  std::vector<CspBlock> blocks;

 private:
  int in_channels_;
  std::vector<int> level_channels_;
};
TORCH_MODULE(Backbone);

Backbone build_backbone(const ValidatedConfig& cfg);

}  // namespace auraseg
