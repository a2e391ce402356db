#include "auraseg/layers.hpp"

#include "auraseg/flops.hpp"

namespace auraseg {

namespace F = torch::nn::functional;

namespace ops {

FeatureMap conv(torch::nn::Conv2d& conv, const FeatureMap& x) {
  auto y = conv->forward(x);
  if (flops::active()) {
    const auto& opt = conv->options;
    const auto& k = *opt.kernel_size();
    flops::add(flops::conv2d(k[0], k[1], opt.in_channels() / opt.groups(), opt.out_channels(), y.size(2),
                             y.size(3)) *
               y.size(0));
  }
  return y;
}

FeatureMap batch_norm(torch::nn::BatchNorm2d& bn, const FeatureMap& x) {
  flops::add(2 * x.numel());
  return bn->forward(x);
}

FeatureMap relu(const FeatureMap& x) {
  flops::add(x.numel());
  return torch::relu(x);
}

FeatureMap sigmoid(const FeatureMap& x) {
  flops::add(x.numel());
  return torch::sigmoid(x);
}

FeatureMap add(const FeatureMap& a, const FeatureMap& b) {
  auto y = a + b;
  flops::add(y.numel());
  return y;
}

FeatureMap mul(const FeatureMap& a, const FeatureMap& b) {
  auto y = a * b;
  flops::add(y.numel());
  return y;
}

FeatureMap upsample_bilinear(const FeatureMap& x, int64_t height, int64_t width) {
  auto y = F::interpolate(x, F::InterpolateFuncOptions()
                                 .size(std::vector<int64_t>{height, width})
                                 .mode(torch::kBilinear)
                                 .align_corners(false));
  flops::add(8 * y.numel());
  return y;
}

FeatureMap upsample_bilinear(const FeatureMap& x, int64_t factor) {
  return upsample_bilinear(x, x.size(2) * factor, x.size(3) * factor);
}

FeatureMap downsample_nearest(const FeatureMap& x, int64_t height, int64_t width) {
  return F::interpolate(x, F::InterpolateFuncOptions()
                               .size(std::vector<int64_t>{height, width})
                               .mode(torch::kNearest));
}

FeatureMap global_avg_pool(const FeatureMap& x) {
  flops::add(x.numel());
  return x.mean({2, 3}, /*keepdim=*/true);
}

FeatureMap channel_max(const FeatureMap& x) {
  flops::add(x.numel());
  return std::get<0>(x.max(1, /*keepdim=*/true));
}

FeatureMap channel_mean(const FeatureMap& x) {
  flops::add(x.numel());
  return x.mean(1, /*keepdim=*/true);
}

}  // namespace ops

ConvBnReluImpl::ConvBnReluImpl(const ConvBnReluOptions& options) : options_(options) {
  const int64_t padding = options.dilation() * (options.kernel_size() / 2);
  conv = register_module("conv", torch::nn::Conv2d(torch::nn::Conv2dOptions(options.in_channels(),
                                                                          options.out_channels(),
                                                                          options.kernel_size())
                                                       .stride(options.stride())
                                                       .padding(padding)
                                                       .dilation(options.dilation())
                                                       .bias(false)));
  bn = register_module("bn", torch::nn::BatchNorm2d(options.out_channels()));
}

FeatureMap ConvBnReluImpl::forward(const FeatureMap& x) {
  auto y = ops::batch_norm(bn, ops::conv(conv, x));
  return options_.relu() ? ops::relu(y) : y;
}

torch::nn::Conv2d make_head(int64_t in_channels, int64_t out_channels) {
  return torch::nn::Conv2d(torch::nn::Conv2dOptions(in_channels, out_channels, 1).bias(true));
}

}  // namespace auraseg
