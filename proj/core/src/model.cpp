#include "auraseg/model.hpp"

#include "auraseg/errors.hpp"
#include "auraseg/flops.hpp"
#include "auraseg/layers.hpp"

namespace auraseg {

AuraSegImpl::AuraSegImpl(const ValidatedConfig& cfg) : cfg_(cfg) {
  backbone = register_module("backbone", build_backbone(cfg));
  if (cfg->use_aspp) aspp = register_module("aspp", AsppLite(aspp_spec_from(cfg)));
  if (cfg->use_apud) {
    decoder = register_module("decoder", Apud(apud_spec_from(cfg)));
  } else {
    head = register_module("head", make_head(cfg.context_channels(), cfg->num_classes));
  }
  if (cfg->use_rbrm) rbrm = register_module("rbrm", Rbrm(rbrm_spec_from(cfg)));
}

SegmentationOutput AuraSegImpl::forward(const FeatureMap& images) {
  check_channels(images, cfg_->in_channels, "model input");
  check_divisible(images, kMaxStride, "model input");
  const int64_t height = images.size(2);
  const int64_t width = images.size(3);

  const FeaturePyramid pyramid = backbone(images);
  FeatureMap context = aspp ? aspp(pyramid.deepest()) : pyramid.deepest();

  SegmentationOutput out;
  if (decoder) {
    auto decoded = decoder(pyramid, context);
    out.coarse_logits = std::move(decoded.coarse_logits);
    out.aux_logits = std::move(decoded.aux_logits);
  } else {
    flops::ModuleScope scope("head");
    out.coarse_logits = ops::upsample_bilinear(ops::conv(head, context), height, width);
  }
  check_spatial(out.coarse_logits, height, width, "coarse logits");
  if (rbrm) out.refined_logits = rbrm(out.coarse_logits);

  {
    flops::ModuleScope scope("head");
    out.final_prob = ops::sigmoid(out.final_logits());
  }
  check_channels(out.final_prob, cfg_->num_classes, "final probabilities");
  check_spatial(out.final_prob, height, width, "final probabilities");
  return out;
}

AuraSeg build_model(const ValidatedConfig& cfg, uint64_t seed, Precision precision) {
  torch::manual_seed(seed);
  AuraSeg model(cfg);
  model->to(dtype_of(precision));
  return model;
}

size_t copy_matching_state(torch::nn::Module& target, const torch::nn::Module& source) {
  torch::NoGradGuard no_grad;
  size_t copied = 0;
  auto source_params = source.named_parameters(/*recurse=*/true);
  auto source_buffers = source.named_buffers(/*recurse=*/true);
  for (auto& item : target.named_parameters(true)) {
    if (const auto* src = source_params.find(item.key())) {
      item.value().copy_(*src);
      ++copied;
    }
  }
  for (auto& item : target.named_buffers(true)) {
    if (const auto* src = source_buffers.find(item.key())) {
      item.value().copy_(*src);
      ++copied;
    }
  }
  return copied;
}

}  // namespace auraseg
