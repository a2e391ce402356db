#pragma once

#include <string>
#include <vector>

namespace auraseg {

struct ModelConfig {
  int in_channels = 3;
  int num_classes = 1;
  // Stem width followed by one entry per CSP stage; strides are fixed at 2..32.
  std::vector<int> encoder_channels{32, 64, 128, 192, 256};
  std::vector<int> encoder_blocks{1, 2, 2, 1};
  bool use_aspp = true;
  bool use_apud = true;
  bool use_rbrm = true;
  int aspp_filters = 128;
  std::vector<int> aspp_dilations{1, 6, 12};
  int aspp_out_channels = 512;
  // Deep to shallow: stages emit stride 16, 8, 4 and 2 features.
  std::vector<int> decoder_channels{256, 128, 64, 32};
  int se_reduction = 16;
  int spatial_kernel = 7;
  int rbrm_depth = 4;
  int rbrm_base_channels = 16;
  int input_height = 512;
  int input_width = 512;

  bool operator==(const ModelConfig&) const = default;
};

// A ModelConfig that has passed validate_config. Only validate_config can
// produce one, so anything that takes a ValidatedConfig may rely on the
// invariants without rechecking.
class ValidatedConfig {
 public:
  const ModelConfig& get() const noexcept { return cfg_; }
  const ModelConfig* operator->() const noexcept { return &cfg_; }

  int csp_stage_count() const noexcept { return static_cast<int>(cfg_.encoder_blocks.size()); }
  int decoder_stage_count() const noexcept { return static_cast<int>(cfg_.decoder_channels.size()); }
  /// Channels entering the decoder: ASPP-Lite output when enabled, else the deepest encoder level.
  int context_channels() const noexcept;

 private:
  explicit ValidatedConfig(ModelConfig cfg) : cfg_(std::move(cfg)) {}
  friend ValidatedConfig validate_config(const ModelConfig& cfg);

  ModelConfig cfg_;
};

/// Throws ConfigError naming the first violated invariant.
ValidatedConfig validate_config(const ModelConfig& cfg);

}  // namespace auraseg
