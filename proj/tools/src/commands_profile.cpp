#include "commands.hpp"

#include "auraseg/errors.hpp"
#include "auraseg/profiler.hpp"
#include "auraseg/trainer.hpp"
#include "render.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace auraseg::cli {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
}

}  // namespace

int cmd_profile(const ProfileArgs& args, std::ostream& out) {
  const RunConfig cfg = resolve_config(args.config);
  const auto validated = validate_config(cfg.model);
  write_snapshot(args.out_dir, cfg);
  auto model = build_model(validated, cfg.trainer.seed, cfg.trainer.precision);
  const int h = cfg.model.input_height;
  const int w = cfg.model.input_width;

  const auto params = count_parameters(*model);
  const auto flops = count_flops(model, h, w);
  const auto fps = measure_fps(model, h, w, args.warmup, args.iters);

  std::ostringstream text;
  char line[256];
  std::snprintf(line, sizeof(line), "input %dx%d, batch 1, %s\n", h, w, fps.hardware.c_str());
  text << line;
  text << "measurement assumes no concurrent load on this machine\n";
  std::snprintf(line, sizeof(line), "%-10s %12s %14s\n", "module", "params", "GFLOPs");
  text << line;
  std::map<std::string, bool> names;
  for (const auto& [k, v] : params.per_module) names[k] = true;
  for (const auto& [k, v] : flops.per_module) names[k] = true;
  for (const auto& [name, unused] : names) {
    const auto p = params.per_module.count(name) ? params.per_module.at(name) : 0;
    const auto f = flops.per_module.count(name) ? flops.per_module.at(name) : 0;
    std::snprintf(line, sizeof(line), "%-10s %12lld %14.4f\n", name.c_str(), static_cast<long long>(p), f / 1e9);
    text << line;
  }
  std::snprintf(line, sizeof(line), "%-10s %12lld %14.4f\n", "total", static_cast<long long>(params.total),
                flops.gflops());
  text << line;
  std::snprintf(line, sizeof(line), "FPS mean %.2f, latency p50 %.2f ms, p95 %.2f ms (%d iters after %d warmup)\n",
                fps.mean_fps, fps.p50_ms, fps.p95_ms, fps.iters, fps.warmup);
  text << line;

  nlohmann::json j = {{"input", {h, w}},
                      {"params", params.total},
                      {"params_per_module", params.per_module},
                      {"flops", flops.total},
                      {"gflops", flops.gflops()},
                      {"flops_per_module", flops.per_module},
                      {"flops_per_path", flops.per_path},
                      {"fps_mean", fps.mean_fps},
                      {"latency_p50_ms", fps.p50_ms},
                      {"latency_p95_ms", fps.p95_ms},
                      {"iters", fps.iters},
                      {"warmup", fps.warmup},
                      {"hardware", fps.hardware},
                      {"exclusive_measurement_assumed", true}};
  write_text(args.out_dir / "profile.txt", text.str());
  write_text(args.out_dir / "profile.json", j.dump(2) + "\n");
  out << text.str();
  return kSuccess;
}

int cmd_ablate(const AblateArgs& args, std::ostream& out) {
  const RunConfig cfg = resolve_config(args.config);
  validate_config(cfg.model);
  for (const auto& [name, variant] : ablation_variants(cfg.model)) validate_config(variant);
  write_snapshot(args.out_dir, cfg);

  AblationOptions options;
  options.measure_fps = args.measure_fps;
  options.fps_iters = args.fps_iters;
  options.seed = cfg.trainer.seed;
  auto rows = run_ablation(cfg.model, options);
  const auto variants = ablation_variants(cfg.model);

  // One model per variant for the overlay strip: trained (first seed) when
  // requested, otherwise freshly initialized.
  std::vector<AuraSeg> strip_models;
  Dataset dataset;
  if (args.train_toy) {
    RunConfig toy_cfg = cfg;
    toy_cfg.data.source = "toy";
    dataset = load_configured_dataset(toy_cfg);
    for (size_t v = 0; v < variants.size(); ++v) {
      double miou_sum = 0.0;
      for (int s = 0; s < args.seeds; ++s) {
        RunConfig run_cfg = toy_cfg;
        run_cfg.model = variants[v].second;
        run_cfg.trainer.seed = cfg.trainer.seed + static_cast<uint64_t>(s);
        auto result = train(run_cfg, dataset, {});
        EvalOptions eval;
        eval.batch_size = cfg.trainer.eval_batch_size;
        eval.threshold = cfg.trainer.eval_threshold;
        const auto& split = dataset.test.empty() ? dataset.val : dataset.test;
        const double miou = evaluate(result.model, split, run_cfg.data, eval).aggregate.miou;
        miou_sum += miou;
        char line[160];
        std::snprintf(line, sizeof(line), "%-32s seed %llu  toy mIoU %.4f (stopped at epoch %d)\n",
                      variants[v].first.c_str(), static_cast<unsigned long long>(run_cfg.trainer.seed), miou,
                      result.stopped_epoch);
        out << line << std::flush;
        if (s == 0) strip_models.push_back(result.model);
      }
      rows[v].toy_miou = miou_sum / args.seeds;
    }
  } else {
    dataset = make_toy_splits(cfg.data, cfg.model.input_height, cfg.model.input_width);
    for (const auto& [name, variant] : variants) {
      strip_models.push_back(build_model(validate_config(variant), cfg.trainer.seed, cfg.trainer.precision));
    }
  }

  const int h = cfg.model.input_height;
  const int w = cfg.model.input_width;
  std::string table = format_ablation_table(rows, h, w);
  if (args.train_toy) {
    bool monotone = true;
    for (size_t i = 1; i < rows.size(); ++i) monotone = monotone && rows[i].toy_miou >= rows[i - 1].toy_miou;
    table += monotone ? "# toy mIoU is non-decreasing along the variant chain\n"
                      : "# note: toy mIoU is not monotone along the variant chain (soft expectation, logged only)\n";
  }
  write_text(args.out_dir / "ablation.txt", table);
  write_text(args.out_dir / "ablation.jsonl", ablation_jsonl(rows, h, w));
  out << table;

  const auto& strip_split = dataset.test.empty() ? (dataset.val.empty() ? dataset.train : dataset.val) : dataset.test;
  if (!strip_split.empty()) {
    const Sample& sample = strip_split.front();
    const RawImage image = tensor_to_image(sample.image);
    std::vector<RawImage> tiles{image, render_overlay(image, sample.mask[0])};
    for (auto& model : strip_models) {
      const auto prob = predict_probability(model, image, cfg.data);
      tiles.push_back(render_overlay(image, binarize(prob, cfg.trainer.eval_threshold)));
    }
    write_png(args.out_dir / "ablation_strip.png", hconcat(tiles));
    out << "wrote " << (args.out_dir / "ablation_strip.png").string()
        << " (input, ground truth, then one overlay per variant for " << sample.id << ")\n";
  }
  return kSuccess;
}

}  // namespace auraseg::cli
