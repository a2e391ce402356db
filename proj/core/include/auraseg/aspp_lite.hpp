#pragma once

#include "auraseg/feature_map.hpp"
#include "auraseg/layers.hpp"
#include "auraseg/model_config.hpp"

#include <torch/torch.h>

#include <vector>

namespace auraseg {

struct AsppLiteSpec {
  int in_channels = 256;
  int filters_per_branch = 128;
  std::vector<int> dilations{1, 6, 12};
  int out_channels = 512;
};

/// Odd-sized convolution with padding dilation * (k / 2), so spatial dims are
/// preserved; a 3x3 kernel then covers a (2 * dilation + 1)^2 footprint.
/// `weight` is [Cout, Cin, k, k]; bias optional.
FeatureMap dilated_conv(const FeatureMap& x, const torch::Tensor& weight, int dilation,
                        const torch::Tensor& bias = {});

// Parallel 3x3 dilated conv branches (conv + BN + ReLU each), concatenated in
// ascending dilation order and fused by a 1x1 conv + BN + ReLU. There is no
// global-pooling branch.
class AsppLiteImpl : public torch::nn::Module {
 public:
  explicit AsppLiteImpl(const AsppLiteSpec& spec);

  FeatureMap forward(const FeatureMap& x);
  /// Branch outputs concatenated along channels, before fusion.
  FeatureMap concat_branches(const FeatureMap& x);

  const AsppLiteSpec& spec() const noexcept { return spec_; }

  std::vector<ConvBnRelu> branches;
  ConvBnRelu fuse{nullptr};

 private:
  AsppLiteSpec spec_;
};
TORCH_MODULE(AsppLite);

AsppLiteSpec aspp_spec_from(const ValidatedConfig& cfg);

}  // namespace auraseg
