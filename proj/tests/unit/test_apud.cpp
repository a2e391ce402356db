#include "auraseg/apud.hpp"
#include "auraseg/errors.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace auraseg;
using torch::indexing::Slice;

TEST(SeAttention, ReducedWidth) {
  EXPECT_EQ(se_reduced_channels(256, 16), 16);
  EXPECT_EQ(se_reduced_channels(64, 16), 4);
  EXPECT_EQ(se_reduced_channels(32, 16), 4);
  EXPECT_EQ(se_reduced_channels(2, 16), 4);
}

TEST(SeAttention, ZeroInputGivesZeroOutput) {
  SeAttention se(8);
  const auto x = torch::zeros({2, 8, 5, 5});
  EXPECT_TRUE(torch::equal(se(x), x));
}

TEST(SeAttention, ZeroWeightsGateAtExactlyHalf) {
  SeAttention se(8);
  torch::NoGradGuard g;
  for (auto& p : se->parameters()) p.zero_();
  const auto x = torch::randn({2, 8, 5, 5});
  EXPECT_TRUE(torch::equal(se->gates(x), torch::full({2, 8, 1, 1}, 0.5)));
  EXPECT_TRUE(torch::equal(se(x), x / 2));
}

TEST(SeAttention, LargerChannelGetsLargerGate) {
  SeAttention se(2);
  torch::NoGradGuard g;
  for (auto& p : se->parameters()) p.zero_();
  // g_c = sigmoid(relu(mean_c)) with these pass-through weights.
  se->squeeze->weight[0][0][0][0] = 1.0;
  se->squeeze->weight[1][1][0][0] = 1.0;
  se->excite->weight[0][0][0][0] = 1.0;
  se->excite->weight[1][1][0][0] = 1.0;
  auto x = torch::empty({1, 2, 4, 4});
  x[0][0].fill_(5.0);
  x[0][1].fill_(0.01);
  const auto gates = se->gates(x).flatten();
  EXPECT_GT(gates[0].item<float>(), gates[1].item<float>());
  const auto y = se(x);
  EXPECT_GT(y[0][0].norm().item<float>(), y[0][1].norm().item<float>());
}

TEST(SpatialAttention, MaskShape) {
  SpatialAttention sa(7);
  EXPECT_EQ(sa->mask(torch::randn({1, 64, 32, 32})).sizes(), (std::vector<int64_t>{1, 1, 32, 32}));
}

TEST(SpatialAttention, ZeroWeightsMaskIsHalf) {
  SpatialAttention sa(7);
  torch::NoGradGuard g;
  for (auto& p : sa->parameters()) p.zero_();
  const auto x = torch::randn({2, 3, 6, 6});
  EXPECT_TRUE(torch::equal(sa->mask(x), torch::full({2, 1, 6, 6}, 0.5)));
  EXPECT_TRUE(torch::equal(sa(x), x / 2));
}

TEST(SpatialAttention, SpatiallyConstantInputScalesUniformlyAwayFromBorder) {
  torch::manual_seed(2);
  SpatialAttention sa(7);
  torch::NoGradGuard g;
  auto x = torch::empty({1, 3, 16, 16}, torch::kFloat64);
  x[0][0].fill_(0.3);
  x[0][1].fill_(-1.2);
  x[0][2].fill_(2.0);
  sa->to(torch::kFloat64);
  const auto y = sa(x);
  // Padding only reaches the outer three rows and columns of a 7x7 kernel.
  const auto ratio = (y / x).index({0, Slice(), Slice(3, 13), Slice(3, 13)});
  const double c = ratio[0][0][0].item<double>();
  EXPECT_GT(c, 0.0);
  EXPECT_LT(c, 1.0);
  EXPECT_TRUE(torch::allclose(ratio, torch::full_like(ratio, c), 0.0, 1e-12));
}

TEST(Attention, ExactZerosStayZeroAndMagnitudeNeverGrows) {
  torch::manual_seed(4);
  SeAttention se(6);
  SpatialAttention sa(7);
  torch::NoGradGuard g;
  for (int trial = 0; trial < 10; ++trial) {
    auto x = torch::randn({2, 6, 8, 8}) * 3;
    x.masked_fill_(torch::rand({2, 6, 8, 8}) < 0.3, 0.0);
    const auto zeros = x.eq(0);
    const auto after_se = se(x);
    const auto after_sa = sa(after_se);
    EXPECT_TRUE(after_se.masked_select(zeros).eq(0).all().item<bool>());
    EXPECT_TRUE(after_sa.masked_select(zeros).eq(0).all().item<bool>());
    EXPECT_TRUE(after_se.abs().le(x.abs()).all().item<bool>());
    EXPECT_TRUE(after_sa.abs().le(after_se.abs()).all().item<bool>());
  }
}

TEST(SeAttention, GatesInvariantUnderSpatialPermutation) {
  torch::manual_seed(6);
  SeAttention se(5);
  se->to(torch::kFloat64);
  torch::NoGradGuard g;
  const auto x = torch::randn({1, 5, 6, 6}, torch::kFloat64);
  const auto perm = torch::randperm(36);
  const auto xp = x.view({1, 5, 36}).index_select(2, perm).view({1, 5, 6, 6});
  EXPECT_TRUE(torch::allclose(se->gates(x), se->gates(xp), 0.0, 1e-14));
  const auto y = se(x).view({1, 5, 36}).index_select(2, perm).view({1, 5, 6, 6});
  EXPECT_TRUE(torch::allclose(se(xp), y, 0.0, 1e-14));
}

TEST(SeAttention, WeightGradientMatchesFiniteDifferences) {
  torch::manual_seed(8);
  SeAttention se(2);
  se->to(torch::kFloat64);
  const auto x = torch::randn({1, 2, 4, 4}, torch::kFloat64);
  const auto target = torch::randn({1, 2, 4, 4}, torch::kFloat64);
  auto loss_of = [&] { return (se(x) - target).pow(2).sum(); };
  for (auto& item : se->named_parameters()) {
    auto& p = item.value();
    se->zero_grad();
    loss_of().backward();
    const auto analytic = p.grad().clone();
    const auto numeric = oracle::numeric_gradient(
        [&](const torch::Tensor& v) {
          torch::NoGradGuard g;
          const auto saved = p.detach().clone();
          p.copy_(v);
          const double l = loss_of().item<double>();
          p.copy_(saved);
          return l;
        },
        p);
    EXPECT_LT(oracle::relative_error(analytic, numeric), 1e-4) << item.key();
  }
}

TEST(ApudStage, ShapeContract) {
  torch::manual_seed(0);
  ApudStageSpec spec;
  spec.in_channels = 512;
  spec.skip_channels = 192;
  spec.out_channels = 256;
  ApudStage stage(spec);
  torch::NoGradGuard g;
  const auto out = stage(torch::randn({1, 512, 16, 16}), torch::randn({1, 192, 32, 32}));
  EXPECT_EQ(out.features.sizes(), (std::vector<int64_t>{1, 256, 32, 32}));
  EXPECT_EQ(out.aux_logits.sizes(), (std::vector<int64_t>{1, 1, 32, 32}));
  EXPECT_THROW(stage(torch::randn({1, 512, 16, 16}), torch::randn({1, 192, 31, 31})), ShapeError);
  EXPECT_THROW(stage(torch::randn({1, 256, 16, 16}), torch::randn({1, 192, 32, 32})), ShapeError);
}

TEST(Apud, ChainReachesFullResolution) {
  torch::manual_seed(0);
  const auto cfg = validate_config(oracle::small_config());
  Apud apud(apud_spec_from(cfg));
  FeaturePyramid pyr;
  const std::vector<int> ch = cfg->encoder_channels;
  for (size_t i = 0; i < 5; ++i) {
    const int s = kEncoderStrides[i];
    pyr.levels.push_back({s, torch::randn({2, ch[i], 64 / s, 64 / s})});
  }
  torch::NoGradGuard g;
  const auto out = apud(pyr, torch::randn({2, cfg.context_channels(), 2, 2}));
  EXPECT_EQ(out.coarse_logits.sizes(), (std::vector<int64_t>{2, 1, 64, 64}));
  ASSERT_EQ(out.aux_logits.size(), 4u);
  for (size_t i = 0; i < 4; ++i) {
    const int64_t side = 64 / (16 >> i);
    EXPECT_EQ(out.aux_logits[i].sizes(), (std::vector<int64_t>{2, 1, side, side}));
  }
}

TEST(Apud, ParameterCountMatchesFormula) {
  const ModelConfig mc;
  Apud apud(apud_spec_from(validate_config(mc)));
  int64_t n = 0;
  for (const auto& p : apud->parameters()) n += p.numel();
  EXPECT_EQ(n, oracle::decoder_parameters(mc));
}
