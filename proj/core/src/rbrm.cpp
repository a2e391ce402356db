#include "auraseg/rbrm.hpp"

#include "auraseg/errors.hpp"
#include "auraseg/flops.hpp"

namespace auraseg {

std::vector<int> RbrmSpec::level_channels() const {
  std::vector<int> channels{base_channels};
  for (int level = 1; level <= depth; ++level) channels.push_back(base_channels << (level - 1));
  return channels;
}

RbrmImpl::RbrmImpl(const RbrmSpec& spec) : spec_(spec) {
  if (spec.depth < 1) throw ConfigError("refinement depth must be >= 1");
  if (spec.base_channels < 1) throw ConfigError("refinement base_channels must be >= 1");
  const auto channels = spec.level_channels();
  entry = register_module("entry", ConvBnRelu(ConvBnReluOptions(spec.in_channels, channels[0], 3)));
  for (int level = 1; level <= spec.depth; ++level) {
    down.push_back(register_module(
        "down" + std::to_string(level),
        ConvBnRelu(ConvBnReluOptions(channels[level - 1], channels[level], 3).stride(2))));
  }
  bridge = register_module("bridge", ConvBnRelu(ConvBnReluOptions(channels.back(), channels.back(), 3)));
  for (int level = spec.depth; level >= 1; --level) {
    up.push_back(register_module("up" + std::to_string(level),
                                 ConvBnRelu(ConvBnReluOptions(channels[level], channels[level - 1], 3))));
  }
  head = register_module("head", make_head(channels[0], spec.out_channels));
  torch::NoGradGuard no_grad;
  head->weight.zero_();
  head->bias.zero_();
}

FeatureMap RbrmImpl::residual(const FeatureMap& coarse_logits) {
  check_channels(coarse_logits, spec_.in_channels, "refinement input");
  check_divisible(coarse_logits, int64_t{1} << spec_.depth, "refinement input");

  std::vector<FeatureMap> skips;
  FeatureMap x = entry(coarse_logits);
  for (auto& layer : down) {
    skips.push_back(x);
    x = layer(x);
  }
  x = bridge(x);
  for (size_t i = 0; i < up.size(); ++i) {
    const auto& skip = skips[skips.size() - 1 - i];
    x = ops::add(up[i](ops::upsample_bilinear(x, skip.size(2), skip.size(3))), skip);
  }
  return ops::conv(head, x);
}

FeatureMap RbrmImpl::forward(const FeatureMap& coarse_logits) {
  flops::ModuleScope scope("rbrm");
  auto refined = ops::add(coarse_logits, residual(coarse_logits));
  check_spatial(refined, coarse_logits.size(2), coarse_logits.size(3), "refinement output");
  return refined;
}

RbrmSpec rbrm_spec_from(const ValidatedConfig& cfg) {
  RbrmSpec spec;
  spec.depth = cfg->rbrm_depth;
  spec.base_channels = cfg->rbrm_base_channels;
  spec.in_channels = cfg->num_classes;
  spec.out_channels = cfg->num_classes;
  return spec;
}

BoundaryErrorCounts& BoundaryErrorCounts::operator+=(const BoundaryErrorCounts& other) {
  errors += other.errors;
  errors_in_band += other.errors_in_band;
  band_pixels += other.band_pixels;
  pixels += other.pixels;
  return *this;
}

BoundaryErrorCounts boundary_error_counts(const torch::Tensor& pred_mask, const torch::Tensor& gt_mask, int radius) {
  if (radius < 1) throw ValueError("boundary radius must be >= 1");
  if (pred_mask.sizes() != gt_mask.sizes()) throw ShapeError("boundary error map: mask shapes differ");
  if (gt_mask.dim() < 2) throw ShapeError("boundary error map: masks need at least 2 dims");

  const int64_t h = gt_mask.size(-2);
  const int64_t w = gt_mask.size(-1);
  const auto pred = pred_mask.ne(0).to(torch::kUInt8).reshape({-1, h, w}).contiguous();
  const auto gt = gt_mask.ne(0).to(torch::kUInt8).reshape({-1, h, w}).contiguous();
  const auto pa = pred.accessor<uint8_t, 3>();
  const auto ga = gt.accessor<uint8_t, 3>();

  std::vector<std::pair<int, int>> disk;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dy * dy + dx * dx <= radius * radius) disk.emplace_back(dy, dx);
    }
  }

  BoundaryErrorCounts counts;
  std::vector<uint8_t> boundary(static_cast<size_t>(h * w));
  std::vector<uint8_t> band(static_cast<size_t>(h * w));
  for (int64_t n = 0; n < gt.size(0); ++n) {
    std::fill(boundary.begin(), boundary.end(), 0);
    std::fill(band.begin(), band.end(), 0);
    for (int64_t y = 0; y < h; ++y) {
      for (int64_t x = 0; x < w; ++x) {
        const uint8_t v = ga[n][y][x];
        const bool differs = (y > 0 && ga[n][y - 1][x] != v) || (y + 1 < h && ga[n][y + 1][x] != v) ||
                             (x > 0 && ga[n][y][x - 1] != v) || (x + 1 < w && ga[n][y][x + 1] != v);
        boundary[y * w + x] = differs;
      }
    }
    for (int64_t y = 0; y < h; ++y) {
      for (int64_t x = 0; x < w; ++x) {
        if (!boundary[y * w + x]) continue;
        for (const auto& [dy, dx] : disk) {
          const int64_t yy = y + dy;
          const int64_t xx = x + dx;
          if (yy >= 0 && yy < h && xx >= 0 && xx < w) band[yy * w + xx] = 1;
        }
      }
    }
    for (int64_t y = 0; y < h; ++y) {
      for (int64_t x = 0; x < w; ++x) {
        const bool in_band = band[y * w + x] != 0;
        counts.band_pixels += in_band;
        if (pa[n][y][x] != ga[n][y][x]) {
          ++counts.errors;
          counts.errors_in_band += in_band;
        }
      }
    }
    counts.pixels += h * w;
  }
  return counts;
}

double boundary_error_map(const torch::Tensor& pred_mask, const torch::Tensor& gt_mask, int radius) {
  return boundary_error_counts(pred_mask, gt_mask, radius).fraction();
}

}  // namespace auraseg
