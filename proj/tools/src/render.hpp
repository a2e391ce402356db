#pragma once

#include "auraseg/data.hpp"
#include "auraseg/model.hpp"

#include <torch/torch.h>

#include <vector>

namespace auraseg::cli {

inline constexpr double kOverlayAlpha = 0.4;
inline constexpr uint8_t kOverlayColor[3] = {0, 255, 0};

/// Foreground probability at the image's own resolution, [H, W] float in [0, 1].
/// The image is resized to the model input, standardized, and the output
/// probability is resized back bilinearly.
torch::Tensor predict_probability(AuraSeg& model, const RawImage& image, const DataConfig& data);

RawImage to_rgb(const RawImage& image);
/// Blends the overlay colour over pixels where `mask` ([H, W], 0/1) is set.
RawImage render_overlay(const RawImage& rgb, const torch::Tensor& mask, double alpha = kOverlayAlpha);
/// 0/1 mask as a 0/255 grayscale image.
RawImage render_mask(const torch::Tensor& mask);
/// Probability as grayscale, round(255 p).
RawImage render_probability(const torch::Tensor& prob);
/// Side by side; every tile must have the same height and channel count.
RawImage hconcat(const std::vector<RawImage>& tiles, int gap = 4);

}  // namespace auraseg::cli
