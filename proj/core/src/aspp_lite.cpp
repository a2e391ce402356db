#include "auraseg/aspp_lite.hpp"

#include "auraseg/errors.hpp"
#include "auraseg/flops.hpp"

namespace auraseg {

FeatureMap dilated_conv(const FeatureMap& x, const torch::Tensor& weight, int dilation, const torch::Tensor& bias) {
  check_feature_map(x, "dilated conv");
  if (dilation < 1) throw ValueError("dilation must be >= 1");
  if (weight.dim() != 4 || weight.size(2) != weight.size(3) || weight.size(2) % 2 == 0) {
    throw ShapeError("dilated conv expects a square odd [Cout, Cin, k, k] kernel");
  }
  check_channels(x, weight.size(1), "dilated conv");
  const int64_t padding = dilation * (weight.size(2) / 2);
  auto y = torch::conv2d(x, weight, bias, /*stride=*/1, padding, dilation);
  flops::add(flops::conv2d(weight.size(2), weight.size(3), weight.size(1), weight.size(0), y.size(2), y.size(3)) *
             y.size(0));
  return y;
}

AsppLiteImpl::AsppLiteImpl(const AsppLiteSpec& spec) : spec_(spec) {
  if (spec.dilations.empty()) throw ConfigError("ASPP-Lite needs at least one dilation");
  for (size_t i = 0; i < spec.dilations.size(); ++i) {
    if (spec.dilations[i] < 1) throw ConfigError("ASPP-Lite dilations must be >= 1");
    if (i > 0 && spec.dilations[i] <= spec.dilations[i - 1]) {
      throw ConfigError("ASPP-Lite dilations must be strictly ascending");
    }
    branches.push_back(register_module(
        "branch_d" + std::to_string(spec.dilations[i]),
        ConvBnRelu(ConvBnReluOptions(spec.in_channels, spec.filters_per_branch, 3).dilation(spec.dilations[i]))));
  }
  fuse = register_module(
      "fuse", ConvBnRelu(ConvBnReluOptions(spec.filters_per_branch * static_cast<int64_t>(branches.size()),
                                           spec.out_channels, 1)));
}

FeatureMap AsppLiteImpl::concat_branches(const FeatureMap& x) {
  check_channels(x, spec_.in_channels, "ASPP-Lite input");
  std::vector<FeatureMap> outputs;
  outputs.reserve(branches.size());
  for (auto& branch : branches) outputs.push_back(branch(x));
  return torch::cat(outputs, 1);
}

FeatureMap AsppLiteImpl::forward(const FeatureMap& x) {
  flops::ModuleScope scope("aspp");
  auto y = fuse(concat_branches(x));
  check_spatial(y, x.size(2), x.size(3), "ASPP-Lite output");
  return y;
}

AsppLiteSpec aspp_spec_from(const ValidatedConfig& cfg) {
  AsppLiteSpec spec;
  spec.in_channels = cfg->encoder_channels.back();
  spec.filters_per_branch = cfg->aspp_filters;
  spec.dilations = cfg->aspp_dilations;
  spec.out_channels = cfg->aspp_out_channels;
  return spec;
}

}  // namespace auraseg
