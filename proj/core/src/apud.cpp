#include "auraseg/apud.hpp"

#include "auraseg/errors.hpp"
#include "auraseg/flops.hpp"

#include <algorithm>

namespace auraseg {

int64_t se_reduced_channels(int64_t channels, int64_t reduction) {
  return std::max<int64_t>(channels / std::max<int64_t>(reduction, 1), 4);
}

SeAttentionImpl::SeAttentionImpl(int64_t channels, int64_t reduction) : channels_(channels) {
  const int64_t reduced = se_reduced_channels(channels, reduction);
  squeeze = register_module("squeeze", make_head(channels, reduced));
  excite = register_module("excite", make_head(reduced, channels));
}

FeatureMap SeAttentionImpl::gates(const FeatureMap& x) {
  check_channels(x, channels_, "SE attention");
  return ops::sigmoid(ops::conv(excite, ops::relu(ops::conv(squeeze, ops::global_avg_pool(x)))));
}

FeatureMap SeAttentionImpl::forward(const FeatureMap& x) { return ops::mul(x, gates(x)); }

SpatialAttentionImpl::SpatialAttentionImpl(int64_t kernel_size) {
  conv = register_module(
      "conv", torch::nn::Conv2d(torch::nn::Conv2dOptions(2, 1, kernel_size).padding(kernel_size / 2).bias(true)));
}

FeatureMap SpatialAttentionImpl::mask(const FeatureMap& x) {
  check_feature_map(x, "spatial attention");
  auto pooled = torch::cat({ops::channel_max(x), ops::channel_mean(x)}, 1);
  return ops::sigmoid(ops::conv(conv, pooled));
}

FeatureMap SpatialAttentionImpl::forward(const FeatureMap& x) { return ops::mul(x, mask(x)); }

ApudStageImpl::ApudStageImpl(const ApudStageSpec& spec) : spec_(spec) {
  project_below = register_module("project_below",
                                  ConvBnRelu(ConvBnReluOptions(spec.in_channels, spec.out_channels, 1)));
  project_skip = register_module("project_skip",
                                 ConvBnRelu(ConvBnReluOptions(spec.skip_channels, spec.out_channels, 1)));
  se = register_module("se", SeAttention(spec.out_channels, spec.se_reduction));
  spatial = register_module("spatial", SpatialAttention(spec.spatial_kernel));
  refine = register_module("refine", ConvBnRelu(ConvBnReluOptions(spec.out_channels, spec.out_channels, 3)));
  aux_head = register_module("aux_head", make_head(spec.out_channels, spec.num_classes));
}

ApudStageOutput ApudStageImpl::forward(const FeatureMap& below, const FeatureMap& skip) {
  check_channels(below, spec_.in_channels, "decoder stage input");
  check_channels(skip, spec_.skip_channels, "decoder stage skip");
  if (skip.size(0) != below.size(0)) throw ShapeError("decoder stage: batch size of skip and input differ");
  check_spatial(skip, 2 * below.size(2), 2 * below.size(3), "decoder stage skip");

  auto fused = ops::add(ops::upsample_bilinear(project_below(below), 2), project_skip(skip));
  auto attended = spatial(se(fused));
  ApudStageOutput out;
  out.features = refine(attended);
  out.aux_logits = ops::conv(aux_head, out.features);
  return out;
}

ApudImpl::ApudImpl(const ApudSpec& spec) : spec_(spec) {
  if (spec.skip_channels.size() != spec.stage_channels.size() || spec.stage_channels.empty()) {
    throw ConfigError("decoder needs one stage width per skip level");
  }
  int previous = spec.context_channels;
  for (size_t i = 0; i < spec.stage_channels.size(); ++i) {
    ApudStageSpec stage;
    stage.in_channels = previous;
    stage.skip_channels = spec.skip_channels[i];
    stage.out_channels = spec.stage_channels[i];
    stage.se_reduction = spec.se_reduction;
    stage.spatial_kernel = spec.spatial_kernel;
    stage.num_classes = spec.num_classes;
    stages.push_back(register_module("stage" + std::to_string(i + 1), ApudStage(stage)));
    previous = stage.out_channels;
  }
  head = register_module("head", make_head(previous, spec.num_classes));
}

ApudOutput ApudImpl::forward(const FeaturePyramid& pyramid, const FeatureMap& context) {
  flops::ModuleScope scope("decoder");
  if (pyramid.levels.size() != stages.size() + 1) {
    throw ShapeError("decoder expects " + std::to_string(stages.size() + 1) + " pyramid levels");
  }
  check_spatial(context, pyramid.deepest().size(2), pyramid.deepest().size(3), "decoder context");

  ApudOutput out;
  FeatureMap x = context;
  // Skips are consumed from the second-deepest level upward.
  for (size_t i = 0; i < stages.size(); ++i) {
    const auto& skip = pyramid.levels[pyramid.levels.size() - 2 - i].map;
    auto stage_out = stages[i](x, skip);
    x = stage_out.features;
    out.aux_logits.push_back(stage_out.aux_logits);
  }
  out.coarse_logits = ops::upsample_bilinear(ops::conv(head, x), 2);
  return out;
}

ApudSpec apud_spec_from(const ValidatedConfig& cfg) {
  ApudSpec spec;
  spec.context_channels = cfg.context_channels();
  const auto& enc = cfg->encoder_channels;
  for (auto it = enc.rbegin() + 1; it != enc.rend(); ++it) spec.skip_channels.push_back(*it);
  spec.stage_channels = cfg->decoder_channels;
  spec.se_reduction = cfg->se_reduction;
  spec.spatial_kernel = cfg->spatial_kernel;
  spec.num_classes = cfg->num_classes;
  return spec;
}

}  // namespace auraseg
