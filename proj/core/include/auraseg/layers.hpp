#pragma once

#include "auraseg/feature_map.hpp"

#include <torch/torch.h>

namespace auraseg {

// Thin wrappers over the torch functional API that also report their cost to
// an active flops::Recorder. Every model module routes its compute through
// these so the analytic FLOP count cannot drift from the real forward pass.
namespace ops {

FeatureMap conv(torch::nn::Conv2d& conv, const FeatureMap& x);
FeatureMap batch_norm(torch::nn::BatchNorm2d& bn, const FeatureMap& x);
FeatureMap relu(const FeatureMap& x);
FeatureMap sigmoid(const FeatureMap& x);
FeatureMap add(const FeatureMap& a, const FeatureMap& b);
FeatureMap mul(const FeatureMap& a, const FeatureMap& b);
/// Bilinear resize, align_corners = false.
FeatureMap upsample_bilinear(const FeatureMap& x, int64_t height, int64_t width);
FeatureMap upsample_bilinear(const FeatureMap& x, int64_t factor);
FeatureMap downsample_nearest(const FeatureMap& x, int64_t height, int64_t width);
FeatureMap global_avg_pool(const FeatureMap& x);
FeatureMap channel_max(const FeatureMap& x);
FeatureMap channel_mean(const FeatureMap& x);

}  // namespace ops

struct ConvBnReluOptions {
  ConvBnReluOptions(int64_t in, int64_t out, int64_t kernel) : in_channels_(in), out_channels_(out), kernel_size_(kernel) {}
  TORCH_ARG(int64_t, in_channels);
  TORCH_ARG(int64_t, out_channels);
  TORCH_ARG(int64_t, kernel_size);
  TORCH_ARG(int64_t, stride) = 1;
  TORCH_ARG(int64_t, dilation) = 1;
  TORCH_ARG(bool, relu) = true;
};

/// k x k convolution (padding keeps "same" size at stride 1), batch norm, ReLU.
/// The convolution has no bias since batch norm supplies the shift.
class ConvBnReluImpl : public torch::nn::Module {
 public:
  explicit ConvBnReluImpl(const ConvBnReluOptions& options);

  FeatureMap forward(const FeatureMap& x);

  const ConvBnReluOptions& options() const noexcept { return options_; }

  torch::nn::Conv2d conv{nullptr};
  torch::nn::BatchNorm2d bn{nullptr};

 private:
  ConvBnReluOptions options_;
};
TORCH_MODULE(ConvBnRelu);

/// 1x1 convolution with bias, used for logits heads.
torch::nn::Conv2d make_head(int64_t in_channels, int64_t out_channels);

}  // namespace auraseg
