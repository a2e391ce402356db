#include "auraseg/feature_map.hpp"

#include "auraseg/errors.hpp"

#include <sstream>

namespace auraseg {

namespace {

std::string shape_string(const torch::Tensor& x) {
  std::ostringstream os;
  os << x.sizes();
  return os.str();
}

}  // namespace

torch::Dtype dtype_of(Precision precision) {
  return precision == Precision::Float64 ? torch::kFloat64 : torch::kFloat32;
}

std::string_view to_string(Precision precision) {
  return precision == Precision::Float64 ? "float64" : "float32";
}

Precision parse_precision(std::string_view text) {
  if (text == "float32") return Precision::Float32;
  if (text == "float64") return Precision::Float64;
  throw ConfigError("precision must be float32 or float64, got '" + std::string(text) + "'");
}

void check_feature_map(const FeatureMap& x, std::string_view where) {
  if (!x.defined()) throw ShapeError(std::string(where) + ": undefined feature map");
  if (x.dim() != 4) {
    throw ShapeError(std::string(where) + ": expected [B, C, H, W], got " + shape_string(x));
  }
  for (int64_t d : x.sizes()) {
    if (d < 1) throw ShapeError(std::string(where) + ": empty dimension in " + shape_string(x));
  }
}

void check_channels(const FeatureMap& x, int64_t channels, std::string_view where) {
  check_feature_map(x, where);
  if (x.size(1) != channels) {
    throw ShapeError(std::string(where) + ": expected " + std::to_string(channels) +
                     " channels, got " + shape_string(x));
  }
}

void check_spatial(const FeatureMap& x, int64_t height, int64_t width, std::string_view where) {
  check_feature_map(x, where);
  if (x.size(2) != height || x.size(3) != width) {
    throw ShapeError(std::string(where) + ": expected spatial " + std::to_string(height) + "x" +
                     std::to_string(width) + ", got " + shape_string(x));
  }
}

void check_divisible(const FeatureMap& x, int64_t divisor, std::string_view where) {
  check_feature_map(x, where);
  if (x.size(2) % divisor != 0 || x.size(3) % divisor != 0) {
    throw ShapeError(std::string(where) + ": spatial dims of " + shape_string(x) +
                     " not divisible by " + std::to_string(divisor));
  }
}

const FeatureMap& FeaturePyramid::at_stride(int stride) const {
  for (const auto& level : levels) {
    if (level.stride == stride) return level.map;
  }
  throw ShapeError("feature pyramid has no level at stride " + std::to_string(stride));
}

std::vector<int> FeaturePyramid::strides() const {
  std::vector<int> out;
  out.reserve(levels.size());
  for (const auto& level : levels) out.push_back(level.stride);
  return out;
}

void FeaturePyramid::validate(int64_t input_height, int64_t input_width,
                              const std::vector<int>& channels) const {
  if (channels.size() != levels.size()) {
    throw ShapeError("feature pyramid: " + std::to_string(levels.size()) + " levels but " +
                     std::to_string(channels.size()) + " channel counts");
  }
  int previous = 0;
  for (size_t i = 0; i < levels.size(); ++i) {
    const auto& level = levels[i];
    if (level.stride <= previous) throw ShapeError("feature pyramid: strides not increasing");
    previous = level.stride;
    const std::string where = "pyramid level stride " + std::to_string(level.stride);
    check_channels(level.map, channels[i], where);
    check_spatial(level.map, input_height / level.stride, input_width / level.stride, where);
  }
}

}  // namespace auraseg
