#include "auraseg/model_config.hpp"

#include "auraseg/errors.hpp"
#include "auraseg/feature_map.hpp"

namespace auraseg {

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw ConfigError(message);
}

void require_positive(const std::vector<int>& values, const std::string& name) {
  for (int v : values) require(v >= 1, name + " entries must be >= 1");
}

}  // namespace

int ValidatedConfig::context_channels() const noexcept {
  return cfg_.use_aspp ? cfg_.aspp_out_channels : cfg_.encoder_channels.back();
}

ValidatedConfig validate_config(const ModelConfig& cfg) {
  require(cfg.in_channels >= 1, "in_channels must be >= 1");
  require(cfg.num_classes == 1, "num_classes must be 1 (binary sigmoid head)");

  const size_t levels = kEncoderStrides.size();
  require(cfg.encoder_channels.size() == levels,
          "encoder_channels needs " + std::to_string(levels) + " entries (stem + " +
              std::to_string(levels - 1) + " CSP stages), got " +
              std::to_string(cfg.encoder_channels.size()));
  require(cfg.encoder_blocks.size() == levels - 1,
          "encoder_blocks needs " + std::to_string(levels - 1) + " entries, got " +
              std::to_string(cfg.encoder_blocks.size()));
  require_positive(cfg.encoder_channels, "encoder_channels");
  require_positive(cfg.encoder_blocks, "encoder_blocks");
  for (size_t i = 1; i < cfg.encoder_channels.size(); ++i) {
    require(cfg.encoder_channels[i] % 2 == 0,
            "encoder_channels[" + std::to_string(i) + "] must be even for the CSP split");
  }

  require(!cfg.aspp_dilations.empty(), "aspp_dilations must be nonempty");
  require_positive(cfg.aspp_dilations, "aspp_dilations");
  require(cfg.aspp_filters >= 1, "aspp_filters must be >= 1");
  require(cfg.aspp_out_channels >= 1, "aspp_out_channels must be >= 1");

  require(cfg.decoder_channels.size() == levels - 1,
          "decoder_channels needs " + std::to_string(levels - 1) + " entries (one per skip level), got " +
              std::to_string(cfg.decoder_channels.size()));
  require_positive(cfg.decoder_channels, "decoder_channels");
  require(cfg.se_reduction >= 1, "se_reduction must be >= 1");
  require(cfg.spatial_kernel >= 1 && cfg.spatial_kernel % 2 == 1, "spatial_kernel must be odd and >= 1");

  require(cfg.rbrm_depth >= 1 && (1 << cfg.rbrm_depth) <= kMaxStride,
          "rbrm_depth must be in [1, 5] so input dims stay divisible");
  require(cfg.rbrm_base_channels >= 1, "rbrm_base_channels must be >= 1");
  require(!cfg.use_rbrm || cfg.use_apud, "use_rbrm requires use_apud (refinement consumes decoder output)");

  require(cfg.input_height >= kMaxStride && cfg.input_width >= kMaxStride &&
              cfg.input_height % kMaxStride == 0 && cfg.input_width % kMaxStride == 0,
          "input_size " + std::to_string(cfg.input_height) + "x" + std::to_string(cfg.input_width) +
              " not divisible by 32");
  return ValidatedConfig(cfg);
}

}  // namespace auraseg
