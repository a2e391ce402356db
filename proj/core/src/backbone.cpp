#include "auraseg/backbone.hpp"

#include "auraseg/errors.hpp"
#include "auraseg/flops.hpp"

namespace auraseg {

BottleneckImpl::BottleneckImpl(int64_t channels) {
  reduce = register_module("reduce", ConvBnRelu(ConvBnReluOptions(channels, channels, 1)));
  conv = register_module("conv", ConvBnRelu(ConvBnReluOptions(channels, channels, 3)));
}

FeatureMap BottleneckImpl::forward(const FeatureMap& x) { return ops::add(x, conv(reduce(x))); }

CspBlockImpl::CspBlockImpl(int64_t in_channels, int64_t out_channels, int64_t num_blocks)
    : in_channels_(in_channels), out_channels_(out_channels) {
  if (in_channels < 2 || in_channels % 2 != 0) {
    throw ConfigError("CSP block needs an even input channel count, got " + std::to_string(in_channels));
  }
  if (out_channels < 1 || num_blocks < 1) throw ConfigError("CSP block needs out_channels and num_blocks >= 1");
  bottlenecks = register_module("bottlenecks", torch::nn::ModuleList());
  for (int64_t i = 0; i < num_blocks; ++i) bottlenecks->push_back(Bottleneck(in_channels / 2));
  fuse = register_module("fuse", ConvBnRelu(ConvBnReluOptions(in_channels, out_channels, 1)));
}

FeatureMap CspBlockImpl::forward(const FeatureMap& x) {
  check_channels(x, in_channels_, "csp block");
  auto halves = x.chunk(2, 1);
  FeatureMap partial = halves[0];
  for (const auto& block : *bottlenecks) partial = block->as<Bottleneck>()->forward(partial);
  return fuse(torch::cat({partial, halves[1]}, 1));
}

BackboneOptions BackboneOptions::from_lists(int in_channels, const std::vector<int>& channels,
                                            const std::vector<int>& blocks) {
  if (channels.size() != kEncoderStrides.size()) {
    throw ConfigError("backbone needs " + std::to_string(kEncoderStrides.size()) + " channel entries for " +
                      std::to_string(kEncoderStrides.size()) + " pyramid levels, got " +
                      std::to_string(channels.size()));
  }
  if (blocks.size() + 1 != channels.size()) {
    throw ConfigError("backbone needs one block count per CSP stage (" + std::to_string(channels.size() - 1) +
                      "), got " + std::to_string(blocks.size()));
  }
  BackboneOptions options;
  options.in_channels = in_channels;
  options.stem_channels = channels.front();
  for (size_t i = 0; i < blocks.size(); ++i) options.stages.push_back({channels[i + 1], blocks[i]});
  return options;
}

BackboneImpl::BackboneImpl(const BackboneOptions& options) : in_channels_(options.in_channels) {
  if (options.stages.size() + 1 != kEncoderStrides.size()) {
    throw ConfigError("backbone needs " + std::to_string(kEncoderStrides.size() - 1) + " CSP stages, got " +
                      std::to_string(options.stages.size()));
  }
  stem = register_module("stem",
                         ConvBnRelu(ConvBnReluOptions(options.in_channels, options.stem_channels, 3).stride(2)));
  level_channels_.push_back(options.stem_channels);
  int previous = options.stem_channels;
  for (size_t i = 0; i < options.stages.size(); ++i) {
    const auto& stage = options.stages[i];
    const std::string prefix = "stage" + std::to_string(i + 1);
    downsamples.push_back(register_module(
        prefix + "_down", ConvBnRelu(ConvBnReluOptions(previous, stage.out_channels, 3).stride(2))));
    blocks.push_back(
        register_module(prefix + "_csp", CspBlock(stage.out_channels, stage.out_channels, stage.num_blocks)));
    level_channels_.push_back(stage.out_channels);
    previous = stage.out_channels;
  }
}

FeaturePyramid BackboneImpl::forward(const FeatureMap& x) {
  check_channels(x, in_channels_, "backbone input");
  check_divisible(x, kMaxStride, "backbone input");
  flops::ModuleScope scope("backbone");

  FeaturePyramid pyramid;
  FeatureMap y = stem(x);
  pyramid.levels.push_back({kEncoderStrides[0], y});
  for (size_t i = 0; i < blocks.size(); ++i) {
    y = blocks[i](downsamples[i](y));
    pyramid.levels.push_back({kEncoderStrides[i + 1], y});
  }
  pyramid.validate(x.size(2), x.size(3), level_channels_);
  return pyramid;
}

Backbone build_backbone(const ValidatedConfig& cfg) {
  return Backbone(BackboneOptions::from_lists(cfg->in_channels, cfg->encoder_channels, cfg->encoder_blocks));
}

}  // namespace auraseg
