#include "render.hpp"

#include "auraseg/errors.hpp"

#include <algorithm>
#include <cmath>

namespace auraseg::cli {

namespace F = torch::nn::functional;

torch::Tensor predict_probability(AuraSeg& model, const RawImage& image, const DataConfig& data) {
  const auto& mc = model->config().get();
  const auto dtype = model->parameters().front().scalar_type();
  torch::NoGradGuard no_grad;
  model->eval();
  auto chw = resize_image(image_to_tensor(image), mc.input_height, mc.input_width);
  auto x = standardize(chw.unsqueeze(0).to(dtype), data);
  auto prob = model(x).final_prob;
  if (prob.size(2) != image.height || prob.size(3) != image.width) {
    prob = F::interpolate(prob, F::InterpolateFuncOptions()
                                    .size(std::vector<int64_t>{image.height, image.width})
                                    .mode(torch::kBilinear)
                                    .align_corners(false));
  }
  return prob[0][0].clamp(0.0, 1.0).to(torch::kFloat32).contiguous();
}

RawImage to_rgb(const RawImage& image) {
  if (image.channels == 3) return image;
  return tensor_to_image(image_to_tensor(image));
}

RawImage render_overlay(const RawImage& rgb_in, const torch::Tensor& mask, double alpha) {
  RawImage rgb = to_rgb(rgb_in);
  if (mask.dim() != 2 || mask.size(0) != rgb.height || mask.size(1) != rgb.width) {
    throw ShapeError("overlay mask must be [H, W] matching the image");
  }
  const auto m = mask.to(torch::kUInt8).contiguous();
  const uint8_t* mp = m.data_ptr<uint8_t>();
  for (int64_t i = 0; i < static_cast<int64_t>(rgb.height) * rgb.width; ++i) {
    if (!mp[i]) continue;
    for (int c = 0; c < 3; ++c) {
      auto& v = rgb.pixels[static_cast<size_t>(i) * 3 + c];
      v = static_cast<uint8_t>(std::lround((1.0 - alpha) * v + alpha * kOverlayColor[c]));
    }
  }
  return rgb;
}

RawImage render_mask(const torch::Tensor& mask) {
  if (mask.dim() != 2) throw ShapeError("render_mask expects [H, W]");
  return tensor_to_image(mask.to(torch::kFloat32).unsqueeze(0));
}

RawImage render_probability(const torch::Tensor& prob) {
  if (prob.dim() != 2) throw ShapeError("render_probability expects [H, W]");
  return tensor_to_image(prob.to(torch::kFloat32).unsqueeze(0));
}

RawImage hconcat(const std::vector<RawImage>& tiles, int gap) {
  if (tiles.empty()) throw ValueError("hconcat needs at least one tile");
  RawImage out;
  out.height = tiles.front().height;
  out.channels = tiles.front().channels;
  for (const auto& t : tiles) {
    if (t.height != out.height || t.channels != out.channels) {
      throw ShapeError("hconcat tiles must share height and channel count");
    }
    out.width += t.width;
  }
  out.width += gap * static_cast<int>(tiles.size() - 1);
  out.pixels.assign(static_cast<size_t>(out.height) * out.width * out.channels, 255);
  int x0 = 0;
  for (const auto& t : tiles) {
    for (int y = 0; y < t.height; ++y) {
      const auto* src = t.pixels.data() + static_cast<size_t>(y) * t.width * t.channels;
      auto* dst = out.pixels.data() + (static_cast<size_t>(y) * out.width + x0) * out.channels;
      std::copy(src, src + static_cast<size_t>(t.width) * t.channels, dst);
    }
    x0 += t.width + gap;
  }
  return out;
}

}  // namespace auraseg::cli
