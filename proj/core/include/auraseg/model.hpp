#pragma once

#include "auraseg/apud.hpp"
#include "auraseg/aspp_lite.hpp"
#include "auraseg/backbone.hpp"
#include "auraseg/feature_map.hpp"
#include "auraseg/model_config.hpp"
#include "auraseg/rbrm.hpp"

#include <torch/torch.h>

namespace auraseg {

// Full network. Optional parts are only registered when enabled, so the
// parameter tally of a variant counts exactly what it runs:
//   backbone -> [aspp] -> decoder | (1x1 head + bilinear x32) -> [rbrm] -> sigmoid
class AuraSegImpl : public torch::nn::Module {
 public:
  explicit AuraSegImpl(const ValidatedConfig& cfg);

  SegmentationOutput forward(const FeatureMap& images);

  const ValidatedConfig& config() const noexcept { return cfg_; }

  Backbone backbone{nullptr};
  AsppLite aspp{nullptr};
  Apud decoder{nullptr};
  torch::nn::Conv2d head{nullptr};  // used only when the decoder is disabled
  Rbrm rbrm{nullptr};

 private:
  ValidatedConfig cfg_;
};
TORCH_MODULE(AuraSeg);

/// Seeds torch's generator with `seed` before constructing, so equal seeds give bit-identical weights.
AuraSeg build_model(const ValidatedConfig& cfg, uint64_t seed, Precision precision = Precision::Float32);

/// Copies every parameter and buffer of `source` whose name also exists in
/// `target`; returns the number of tensors copied.
size_t copy_matching_state(torch::nn::Module& target, const torch::nn::Module& source);

}  // namespace auraseg
