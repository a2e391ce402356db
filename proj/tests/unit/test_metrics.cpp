#include "auraseg/errors.hpp"
#include "auraseg/metrics.hpp"
#include "oracles.hpp"

#include <json.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

using namespace auraseg;

TEST(Confusion, PerfectPrediction) {
  auto gt = torch::zeros({16});
  gt.slice(0, 0, 10).fill_(1);
  const auto c = confusion(gt, gt);
  EXPECT_EQ(c, (ConfusionCounts{10, 0, 0, 6}));
}

TEST(Confusion, AllOnesAgainstHalf) {
  auto gt = torch::zeros({4, 4});
  gt.slice(0, 0, 2).fill_(1);
  const auto c = confusion(torch::ones({4, 4}), gt);
  EXPECT_EQ(c, (ConfusionCounts{8, 8, 0, 0}));
}

TEST(Confusion, ErrorsOnShapeAndValues) {
  EXPECT_THROW(confusion(torch::zeros({4, 4}), torch::zeros({4, 5})), ShapeError);
  EXPECT_THROW(confusion(torch::full({2, 2}, 0.5), torch::zeros({2, 2})), ValueError);
}

TEST(ComputeMetrics, Perfect) {
  const auto m = compute_metrics({10, 0, 0, 6});
  for (double v : {m.iou_fg, m.iou_bg, m.miou, m.precision, m.recall, m.f1}) EXPECT_EQ(v, 1.0);
}

TEST(ComputeMetrics, WorkedExample) {
  const auto m = compute_metrics({8, 8, 0, 0});
  EXPECT_DOUBLE_EQ(m.precision, 0.5);
  EXPECT_DOUBLE_EQ(m.recall, 1.0);
  EXPECT_DOUBLE_EQ(m.f1, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.iou_fg, 0.5);
  EXPECT_DOUBLE_EQ(m.iou_bg, 0.0);
  EXPECT_DOUBLE_EQ(m.miou, 0.25);
}

TEST(ComputeMetrics, EmptyConventions) {
  EXPECT_EQ(compute_metrics({0, 0, 0, 16}).iou_fg, 1.0);
  EXPECT_EQ(compute_metrics({0, 0, 0, 16}).precision, 1.0);
  EXPECT_EQ(compute_metrics({0, 0, 4, 12}).precision, 0.0);
  EXPECT_EQ(compute_metrics({0, 3, 0, 13}).recall, 0.0);
  EXPECT_EQ(compute_metrics({16, 0, 0, 0}).iou_bg, 1.0);
  EXPECT_EQ(compute_metrics({0, 8, 8, 0}).f1, 0.0);
}

TEST(ComputeMetrics, MatchesSetOracleOnRandomPairs) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const double density = (trial % 10) / 9.0;
    std::bernoulli_distribution bit(density);
    std::vector<int> pred(256), gt(256);
    for (int i = 0; i < 256; ++i) {
      pred[i] = bit(rng);
      gt[i] = bit(rng);
    }
    const auto pt = torch::tensor(pred).view({16, 16});
    const auto gtt = torch::tensor(gt).view({16, 16});
    const auto c = confusion(pt, gtt);
    const auto o = oracle::recount(pred, gt);
    ASSERT_EQ(c, (ConfusionCounts{o.tp, o.fp, o.fn, o.tn}));
    const auto m = compute_metrics(c);
    const auto e = oracle::metrics_from_sets(pred, gt);
    EXPECT_EQ(m.iou_fg, e.iou_fg);
    EXPECT_EQ(m.iou_bg, e.iou_bg);
    EXPECT_EQ(m.miou, e.miou);
    EXPECT_EQ(m.precision, e.precision);
    EXPECT_EQ(m.recall, e.recall);
    EXPECT_EQ(m.f1, e.f1);
  }
}

TEST(Thresholds, DefaultGrid) {
  const auto t = default_thresholds();
  ASSERT_EQ(t.size(), 255u);
  EXPECT_DOUBLE_EQ(t.front(), 1.0 / 256.0);
  EXPECT_DOUBLE_EQ(t.back(), 255.0 / 256.0);
  EXPECT_TRUE(std::is_sorted(t.begin(), t.end()));
}

TEST(Binarize, StrictlyGreater) {
  const auto b = binarize(torch::tensor({0.0, 0.25, 0.5, 0.50001, 1.0}), 0.5);
  EXPECT_EQ(oracle::to_int_vector(b), (std::vector<int>{0, 0, 0, 1, 1}));
  EXPECT_EQ(oracle::to_int_vector(binarize(torch::tensor({0.0, 1e-9}), 0.0)), (std::vector<int>{0, 1}));
}

TEST(MaxF, ExactProbabilitiesGiveOne) {
  auto gt = torch::zeros({4, 4});
  gt.slice(1, 0, 2).fill_(1);
  const auto r = max_f_score(gt, gt);
  EXPECT_EQ(r.max_f, 1.0);
}

TEST(MaxF, UniformHalfPlateausMatchBruteForce) {
  auto gt = torch::zeros({4, 4});
  gt.slice(0, 0, 2).fill_(1);
  const auto probs = torch::full({4, 4}, 0.5);
  const auto thresholds = default_thresholds();
  const auto sweep = oracle::f1_sweep({oracle::to_vector(probs)}, {oracle::to_int_vector(gt)}, thresholds);
  MaxFAccumulator acc;
  acc.add(probs, gt);
  for (size_t i = 0; i < thresholds.size(); ++i) {
    EXPECT_DOUBLE_EQ(compute_metrics(acc.counts()[i]).f1, sweep[i]) << thresholds[i];
  }
  // Below 0.5 everything is foreground (F = 2/3); at and above, nothing is (F = 0).
  EXPECT_DOUBLE_EQ(sweep.front(), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(sweep.back(), 0.0);
  const auto r = acc.result();
  EXPECT_DOUBLE_EQ(r.max_f, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.threshold, thresholds.front());
}

TEST(MaxF, AccumulatesCountsAcrossImages) {
  torch::manual_seed(7);
  std::vector<std::vector<double>> probs;
  std::vector<std::vector<int>> gts;
  MaxFAccumulator acc;
  for (int k = 0; k < 4; ++k) {
    const auto p = torch::rand({6, 6}, torch::kFloat64);
    const auto g = (torch::rand({6, 6}) < 0.4).to(torch::kFloat32);
    acc.add(p, g);
    probs.push_back(oracle::to_vector(p));
    gts.push_back(oracle::to_int_vector(g));
  }
  const auto sweep = oracle::f1_sweep(probs, gts, acc.thresholds());
  const auto best = *std::max_element(sweep.begin(), sweep.end());
  EXPECT_DOUBLE_EQ(acc.result().max_f, best);
}

TEST(MaxF, DominatesFixedThresholdF1) {
  torch::manual_seed(8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = torch::rand({8, 8}, torch::kFloat64);
    const auto g = (torch::rand({8, 8}) < 0.5).to(torch::kFloat32);
    const double f05 = compute_metrics(confusion(binarize(p, 0.5), g)).f1;
    EXPECT_GE(max_f_score(p, g).max_f, f05);
  }
}

TEST(MaxF, InvariantUnderMonotoneRemap) {
  torch::manual_seed(9);
  const auto p = torch::rand({10, 10}, torch::kFloat64);
  const auto g = (torch::rand({10, 10}) < 0.5).to(torch::kFloat32);
  auto remap = [](double v) { return v * v * v; };
  std::vector<double> t = default_thresholds(63);
  std::vector<double> t2;
  for (double v : t) t2.push_back(remap(v));
  EXPECT_DOUBLE_EQ(max_f_score(p, g, t).max_f, max_f_score(p.pow(3), g, t2).max_f);
}

TEST(MetricsReport, AggregateInvariantToImageOrder) {
  torch::manual_seed(10);
  std::vector<std::pair<torch::Tensor, torch::Tensor>> images;
  for (int k = 0; k < 6; ++k) {
    images.emplace_back(torch::rand({1, 8, 8}), (torch::rand({1, 8, 8}) < 0.5).to(torch::kFloat32));
  }
  MetricsAccumulator forward, backward;
  for (size_t k = 0; k < images.size(); ++k) forward.add_image(std::to_string(k), images[k].first, images[k].second);
  for (size_t k = images.size(); k-- > 0;) backward.add_image(std::to_string(k), images[k].first, images[k].second);
  const auto a = forward.report();
  const auto b = backward.report();
  EXPECT_EQ(a.total, b.total);
  EXPECT_EQ(a.aggregate.miou, b.aggregate.miou);
  EXPECT_EQ(a.aggregate.f1, b.aggregate.f1);
  EXPECT_EQ(a.max_f.max_f, b.max_f.max_f);
}

TEST(MetricsReport, JsonlHasHeaderImagesAndAggregate) {
  MetricsAccumulator acc;
  acc.add_image("a", torch::full({1, 2, 2}, 0.9), torch::ones({1, 2, 2}));
  acc.add_image("b", torch::full({2, 2}, 0.1), torch::ones({2, 2}));
  const auto report = acc.report();
  EXPECT_EQ(report.total, (ConfusionCounts{4, 0, 4, 0}));
  std::istringstream in(report.to_jsonl());
  std::vector<nlohmann::json> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0]["record"], "header");
  EXPECT_EQ(lines[1]["id"], "a");
  EXPECT_EQ(lines[3]["record"], "aggregate");
  EXPECT_DOUBLE_EQ(lines[3]["recall"].get<double>(), 0.5);
}
