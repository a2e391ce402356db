#include "auraseg/profiler.hpp"

#include "auraseg/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace auraseg {

ParameterReport count_parameters(const torch::nn::Module& model) {
  ParameterReport report;
  for (const auto& item : model.named_parameters(/*recurse=*/true)) {
    const std::string& name = item.key();
    const auto dot = name.find('.');
    const std::string top = dot == std::string::npos ? std::string("(root)") : name.substr(0, dot);
    report.per_module[top] += item.value().numel();
    report.total += item.value().numel();
  }
  return report;
}

flops::Breakdown count_flops(const std::function<void()>& forward) {
  flops::Recorder recorder;
  forward();
  return recorder.result();
}

flops::Breakdown count_flops(AuraSeg& model, int64_t height, int64_t width) {
  const bool was_training = model->is_training();
  model->eval();
  torch::NoGradGuard no_grad;
  const auto dtype = model->parameters().front().scalar_type();
  const auto input = torch::zeros({1, model->config()->in_channels, height, width}, torch::TensorOptions().dtype(dtype));
  auto breakdown = count_flops([&] { model(input); });
  model->train(was_training);
  return breakdown;
}

std::string hardware_descriptor() {
  std::string cpu = "unknown cpu";
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) cpu = line.substr(line.find_first_not_of(" \t", colon + 1));
      break;
    }
  }
  return cpu + ", torch threads " + std::to_string(torch::get_num_threads());
}

FpsReport measure_fps(AuraSeg& model, int64_t height, int64_t width, int warmup, int iters) {
  if (iters < 10) throw ValueError("measure_fps needs iters >= 10");
  const bool was_training = model->is_training();
  model->eval();
  torch::NoGradGuard no_grad;
  const auto dtype = model->parameters().front().scalar_type();
  const auto input = torch::randn({1, model->config()->in_channels, height, width}, torch::TensorOptions().dtype(dtype));

  for (int i = 0; i < warmup; ++i) model(input);
  std::vector<double> latencies_ms;
  latencies_ms.reserve(static_cast<size_t>(iters));
  for (int i = 0; i < iters; ++i) {
    const auto start = std::chrono::steady_clock::now();
    auto out = model(input);
    (void)out.final_prob.data_ptr();
    latencies_ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
  }
  model->train(was_training);

  FpsReport report;
  report.iters = iters;
  report.warmup = warmup;
  report.hardware = hardware_descriptor();
  const double total_ms = std::accumulate(latencies_ms.begin(), latencies_ms.end(), 0.0);
  report.mean_fps = 1000.0 * iters / total_ms;
  std::sort(latencies_ms.begin(), latencies_ms.end());
  // Nearest-rank percentiles.
  auto percentile = [&](double q) {
    const auto rank = static_cast<size_t>(std::ceil(q * latencies_ms.size()));
    return latencies_ms[std::clamp<size_t>(rank, 1, latencies_ms.size()) - 1];
  };
  report.p50_ms = percentile(0.50);
  report.p95_ms = percentile(0.95);
  report.p50_fps = 1000.0 / report.p50_ms;
  return report;
}

std::vector<std::pair<std::string, ModelConfig>> ablation_variants(const ModelConfig& base) {
  std::vector<std::pair<std::string, ModelConfig>> variants;
  auto with = [&](bool aspp, bool apud, bool rbrm) {
    ModelConfig cfg = base;
    cfg.use_aspp = aspp;
    cfg.use_apud = apud;
    cfg.use_rbrm = rbrm;
    return cfg;
  };
  variants.emplace_back("Base Model", with(false, false, false));
  variants.emplace_back("Base + ASPP-Lite", with(true, false, false));
  variants.emplace_back("Base + ASPP-Lite + APUD", with(true, true, false));
  variants.emplace_back("Base + ASPP-Lite + APUD + RBRM", with(true, true, true));
  return variants;
}

std::vector<AblationRow> run_ablation(const ModelConfig& base, const AblationOptions& options) {
  std::vector<AblationRow> rows;
  for (const auto& [name, cfg] : ablation_variants(base)) {
    const auto validated = validate_config(cfg);
    auto model = build_model(validated, options.seed);
    AblationRow row;
    row.variant = name;
    row.config = cfg;
    const auto params = count_parameters(*model);
    row.params = params.total;
    row.params_per_module = params.per_module;
    const auto flops = count_flops(model, cfg.input_height, cfg.input_width);
    row.gflops = flops.gflops();
    row.flops_per_module = flops.per_module;
    if (options.measure_fps) {
      row.fps = measure_fps(model, cfg.input_height, cfg.input_width, options.fps_warmup, options.fps_iters).mean_fps;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_ablation_table(const std::vector<AblationRow>& rows, int64_t height, int64_t width) {
  const bool with_miou = std::any_of(rows.begin(), rows.end(), [](const AblationRow& r) { return r.toy_miou >= 0.0; });
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof(line), "# input %lldx%lld, batch 1; GFLOPs = 2 x MACs; %s\n",
                static_cast<long long>(height), static_cast<long long>(width), hardware_descriptor().c_str());
  os << line;
  std::snprintf(line, sizeof(line), "%-32s %12s %8s %8s%s\n", "Variant", "Params", "FPS", "GFLOPs",
                with_miou ? "  toy mIoU" : "");
  os << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%-32s %12lld %8.1f %8.2f", r.variant.c_str(), static_cast<long long>(r.params),
                  r.fps, r.gflops);
    os << line;
    if (with_miou) {
      std::snprintf(line, sizeof(line), "  %8.4f", r.toy_miou);
      os << line;
    }
    os << '\n';
  }
  return os.str();
}

std::string ablation_jsonl(const std::vector<AblationRow>& rows, int64_t height, int64_t width) {
  std::string out;
  for (const auto& r : rows) {
    nlohmann::json j = {{"variant", r.variant},
                        {"params", r.params},
                        {"fps", r.fps},
                        {"gflops", r.gflops},
                        {"input", {height, width}},
                        {"params_per_module", r.params_per_module},
                        {"flops_per_module", r.flops_per_module}};
    if (r.toy_miou >= 0.0) j["toy_miou"] = r.toy_miou;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace auraseg
