#include "auraseg/errors.hpp"
#include "auraseg/layers.hpp"
#include "auraseg/profiler.hpp"
#include "oracles.hpp"

#include <json.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

using namespace auraseg;

namespace {

int64_t conv_flops(int64_t side) {
  torch::nn::Conv2d c(torch::nn::Conv2dOptions(3, 8, 3).padding(1));
  torch::NoGradGuard g;
  return count_flops([&] { ops::conv(c, torch::zeros({1, 3, side, side})); }).total;
}

int64_t brute_force_parameters(const torch::nn::Module& m) {
  int64_t n = 0;
  for (const auto& item : m.named_parameters(true)) {
    int64_t e = 1;
    for (auto d : item.value().sizes()) e *= d;
    n += e;
  }
  return n;
}

}  // namespace

TEST(CountParameters, SingleConvWithBias) {
  struct Net : torch::nn::Module {
    Net() { c = register_module("c", torch::nn::Conv2d(torch::nn::Conv2dOptions(3, 8, 3))); }
    torch::nn::Conv2d c{nullptr};
  } net;
  const auto r = count_parameters(net);
  EXPECT_EQ(r.total, 3 * 3 * 3 * 8 + 8);
  EXPECT_EQ(r.total, 224);
  EXPECT_EQ(r.per_module.at("c"), 224);
}

TEST(CountParameters, BatchNormIsTwoC) {
  struct Net : torch::nn::Module {
    Net() { bn = register_module("bn", torch::nn::BatchNorm2d(12)); }
    torch::nn::BatchNorm2d bn{nullptr};
  } net;
  EXPECT_EQ(count_parameters(net).total, 24);
}

TEST(CountParameters, PartsSumToTotalAndMatchEnumeration) {
  auto model = build_model(validate_config(ModelConfig{}), 0);
  const auto r = count_parameters(*model);
  int64_t sum = 0;
  for (const auto& [name, n] : r.per_module) sum += n;
  EXPECT_EQ(sum, r.total);
  EXPECT_EQ(r.total, brute_force_parameters(*model));
  EXPECT_EQ(r.per_module.at("aspp"), oracle::aspp_parameters(ModelConfig{}));
  EXPECT_EQ(r.per_module.at("backbone"), oracle::backbone_parameters(ModelConfig{}));
}

TEST(CountFlops, ConvWorkedExample) {
  EXPECT_EQ(conv_flops(32), 2 * 9 * 3 * 8 * 32 * 32);
  EXPECT_EQ(conv_flops(32), 442368);
  EXPECT_EQ(conv_flops(16) * 4, conv_flops(32));
}

TEST(CountFlops, NoRecorderMeansNoCount) {
  EXPECT_FALSE(flops::active());
  flops::add(100);
  flops::Breakdown b = count_flops([] { flops::add(7); });
  EXPECT_EQ(b.total, 7);
}

TEST(CountFlops, DefaultModelBreakdown) {
  auto model = build_model(validate_config(ModelConfig{}), 0);
  const auto b = count_flops(model, 512, 512);
  int64_t sum = 0;
  for (const auto& [name, n] : b.per_module) sum += n;
  EXPECT_EQ(sum, b.total);
  EXPECT_LT(b.per_module.at("aspp"), b.per_module.at("decoder"));
  const auto quarter = count_flops(model, 256, 256);
  EXPECT_NEAR(static_cast<double>(quarter.total) * 4, static_cast<double>(b.total), 0.02 * b.total);
}

TEST(Ablation, ParamsAndFlopsStrictlyIncrease) {
  AblationOptions opt;
  opt.measure_fps = false;
  ModelConfig base;
  base.input_height = 128;
  base.input_width = 128;
  const auto rows = run_ablation(base, opt);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].variant, "Base Model");
  EXPECT_EQ(rows[3].variant, "Base + ASPP-Lite + APUD + RBRM");
  for (size_t i = 1; i < rows.size(); ++i) {
    EXPECT_GT(rows[i].params, rows[i - 1].params) << rows[i].variant;
    EXPECT_GT(rows[i].gflops, rows[i - 1].gflops) << rows[i].variant;
  }
  for (const auto& row : rows) EXPECT_EQ(row.params, oracle::parameter_count(row.config)) << row.variant;
  const auto aspp_delta = static_cast<double>(rows[1].params - rows[0].params);
  EXPECT_NEAR(aspp_delta, 1081216.0, 0.2 * 1081216.0);

  const auto table = format_ablation_table(rows, 128, 128);
  for (const auto* column : {"Variant", "Params", "FPS", "GFLOPs"}) EXPECT_NE(table.find(column), std::string::npos);
  std::istringstream in(ablation_jsonl(rows, 128, 128));
  int n = 0;
  for (std::string line; std::getline(in, line); ++n) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["params"].get<int64_t>(), rows[static_cast<size_t>(n)].params);
  }
  EXPECT_EQ(n, 4);
}

TEST(MeasureFps, PositiveWithOrderedPercentiles) {
  auto model = build_model(validate_config(oracle::small_config()), 0);
  const auto r = measure_fps(model, 64, 64, 1, 10);
  EXPECT_GT(r.mean_fps, 0.0);
  EXPECT_TRUE(std::isfinite(r.mean_fps));
  EXPECT_GE(r.p95_ms, r.p50_ms);
  EXPECT_NEAR(r.p50_fps, 1000.0 / r.p50_ms, 1e-9);
  EXPECT_EQ(r.iters, 10);
  EXPECT_FALSE(r.hardware.empty());
  EXPECT_THROW(measure_fps(model, 64, 64, 1, 9), ValueError);
}

TEST(MeasureFps, RbrmCostsThroughput) {
  ModelConfig with;
  with.input_height = 128;
  with.input_width = 128;
  ModelConfig without = with;
  without.use_rbrm = false;
  auto a = build_model(validate_config(with), 0);
  auto b = build_model(validate_config(without), 0);
  std::vector<double> ratio;
  for (int round = 0; round < 3; ++round) {
    const double fa = measure_fps(a, 128, 128, 1, 10).p50_fps;
    const double fb = measure_fps(b, 128, 128, 1, 10).p50_fps;
    ratio.push_back(fa / fb);
  }
  std::sort(ratio.begin(), ratio.end());
  EXPECT_LE(ratio[1], 1.0);
}
