#include "auraseg/losses.hpp"
#include "auraseg/metrics.hpp"
#include "auraseg/model.hpp"
#include "auraseg/profiler.hpp"
#include "auraseg/rbrm.hpp"

#include <benchmark/benchmark.h>

using namespace auraseg;

namespace {

ModelConfig variant(int index, int side) {
  ModelConfig base;
  base.input_height = side;
  base.input_width = side;
  return ablation_variants(base).at(static_cast<size_t>(index)).second;
}

// Args: ablation variant index (0 base .. 3 full), input side.
void BM_Forward(benchmark::State& state) {
  const auto cfg = variant(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  auto model = build_model(validate_config(cfg), 0);
  model->eval();
  torch::NoGradGuard g;
  const auto x = torch::randn({1, 3, cfg.input_height, cfg.input_width});
  for (auto _ : state) benchmark::DoNotOptimize(model(x).final_prob);
  state.SetLabel(ablation_variants(cfg).at(static_cast<size_t>(state.range(0))).first);
}
BENCHMARK(BM_Forward)->ArgsProduct({{0, 1, 2, 3}, {128, 256}})->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  const auto cfg = variant(3, static_cast<int>(state.range(0)));
  auto model = build_model(validate_config(cfg), 0);
  torch::optim::AdamW opt(model->parameters(), torch::optim::AdamWOptions(1e-3));
  const auto x = torch::randn({2, 3, cfg.input_height, cfg.input_width});
  const auto y = (torch::rand({2, 1, cfg.input_height, cfg.input_width}) < 0.5).to(torch::kFloat32);
  for (auto _ : state) {
    opt.zero_grad();
    auto loss = total_loss(model(x), y, LossParams{}).total;
    loss.backward();
    opt.step();
  }
}
BENCHMARK(BM_TrainStep)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_MaxFSweep(benchmark::State& state) {
  const int64_t side = state.range(0);
  const auto probs = torch::rand({side, side});
  const auto gt = (torch::rand({side, side}) < 0.5).to(torch::kFloat32);
  for (auto _ : state) benchmark::DoNotOptimize(max_f_score(probs, gt).max_f);
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_MaxFSweep)->Arg(128)->Arg(512);

void BM_BoundaryError(benchmark::State& state) {
  const int64_t side = state.range(0);
  const auto pred = (torch::rand({side, side}) < 0.5).to(torch::kFloat32);
  const auto gt = (torch::rand({side, side}) < 0.5).to(torch::kFloat32);
  for (auto _ : state) benchmark::DoNotOptimize(boundary_error_map(pred, gt, 2));
}
BENCHMARK(BM_BoundaryError)->Arg(128)->Arg(512);

}  // namespace

BENCHMARK_MAIN();
