#include "commands.hpp"

#include "auraseg/checkpoint.hpp"
#include "auraseg/errors.hpp"
#include "auraseg/trainer.hpp"
#include "render.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <ostream>

namespace auraseg::cli {

namespace fs = std::filesystem;

RunConfig resolve_config(const ConfigArgs& args) {
  return load_run_config(args.config_path, args.overrides);
}

void write_snapshot(const fs::path& out_dir, const RunConfig& cfg) {
  fs::create_directories(out_dir);
  to_document(cfg).save(out_dir / kResolvedConfigName);
}

Dataset load_configured_dataset(const RunConfig& cfg) {
  const int h = cfg.model.input_height;
  const int w = cfg.model.input_width;
  if (cfg.data.source == "toy") return make_toy_splits(cfg.data, h, w);
  if (cfg.data.manifest.empty()) throw ConfigError("key 'data.manifest' must be set when data.source = manifest");
  const fs::path root = cfg.data.root;
  fs::path manifest = cfg.data.manifest;
  if (manifest.is_relative() && !fs::exists(manifest)) manifest = root / manifest;
  const auto records = load_manifest(root, manifest);
  return load_dataset(records, root, h, w);
}

LoadedModel load_model(const fs::path& checkpoint) {
  const auto info = read_checkpoint_info(checkpoint);
  LoadedModel loaded;
  loaded.config = parse_run_config(info.config_text);
  loaded.model = build_model(validate_config(loaded.config.model), loaded.config.trainer.seed,
                             loaded.config.trainer.precision);
  load_checkpoint(checkpoint, *loaded.model);
  loaded.model->eval();
  return loaded;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
}

nlohmann::json metrics_json(const MetricsReport& report) {
  const auto& m = report.aggregate;
  return {{"images", report.per_image.size()},
          {"miou", m.miou},
          {"iou_fg", m.iou_fg},
          {"iou_bg", m.iou_bg},
          {"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"max_f", report.max_f.max_f},
          {"max_f_threshold", report.max_f.threshold}};
}

void print_metrics(std::ostream& out, const std::string& label, const MetricsReport& report) {
  const auto& m = report.aggregate;
  char line[256];
  std::snprintf(line, sizeof(line), "%-6s mIoU %.4f  F1 %.4f  P %.4f  R %.4f  maxF %.4f (%zu images)\n",
                label.c_str(), m.miou, m.f1, m.precision, m.recall, report.max_f.max_f, report.per_image.size());
  out << line;
}

}  // namespace

int cmd_train(const TrainArgs& args, std::ostream& out) {
  const RunConfig cfg = resolve_config(args.config);
  validate_config(cfg.model);
  validate_loss_params(cfg.loss);
  validate_train_config(cfg.trainer);
  write_snapshot(args.out_dir, cfg);
  const Dataset dataset = load_configured_dataset(cfg);
  out << "train " << dataset.train.size() << ", val " << dataset.val.size() << ", test " << dataset.test.size()
      << " samples at " << cfg.model.input_height << "x" << cfg.model.input_width << '\n';

  TrainOptions options;
  options.output_dir = args.out_dir;
  options.on_epoch = [&out](const EpochRecord& r) {
    char line[200];
    std::snprintf(line, sizeof(line), "epoch %3d  loss %.5f  val mIoU %.4f  lr %.3g%s\n", r.epoch, r.loss, r.monitor,
                  r.lr, r.improved ? "  *" : "");
    out << line << std::flush;
  };
  TrainResult result = train(cfg, dataset, options);
  out << "stopped at epoch " << result.stopped_epoch << " (" << result.stop_reason << "), best epoch "
      << result.best_epoch << " val mIoU " << result.best_monitor << '\n';

  EvalOptions eval;
  eval.batch_size = cfg.trainer.eval_batch_size;
  eval.threshold = cfg.trainer.eval_threshold;
  nlohmann::json summary = {{"best_epoch", result.best_epoch},
                            {"best_monitor", result.best_monitor},
                            {"stopped_epoch", result.stopped_epoch},
                            {"stop_reason", result.stop_reason},
                            {"checkpoint", result.best_checkpoint.filename().string()}};
  std::string report_text;
  for (Split split : {Split::Train, Split::Val, Split::Test}) {
    const auto& samples = dataset.split(split);
    if (samples.empty()) continue;
    const auto report = evaluate(result.model, samples, cfg.data, eval);
    const std::string name(to_string(split));
    summary["splits"][name] = metrics_json(report);
    print_metrics(out, name, report);
    if (split == Split::Test || (split == Split::Val && dataset.test.empty())) report_text = report.to_jsonl();
  }
  write_text(args.out_dir / "report.jsonl", report_text);
  write_text(args.out_dir / "summary.json", summary.dump(2) + "\n");
  out << "wrote " << (args.out_dir / "best.ckpt").string() << '\n';
  return kSuccess;
}

int cmd_evaluate(const EvaluateArgs& args, std::ostream& out) {
  LoadedModel loaded = load_model(args.checkpoint);
  KeyValueDocument doc = args.config.config_path.empty() ? to_document(loaded.config)
                                                         : KeyValueDocument::load(args.config.config_path);
  for (const auto& assignment : args.config.overrides) doc.apply_override(assignment);
  RunConfig cfg = run_config_from(doc);
  if (!(cfg.model == loaded.config.model)) {
    out << "note: model.* keys come from the checkpoint; config values ignored\n";
    cfg.model = loaded.config.model;
  }
  write_snapshot(args.out_dir, cfg);

  const Dataset dataset = load_configured_dataset(cfg);
  const Split split = parse_split(args.split);
  const auto& samples = dataset.split(split);
  EvalOptions eval;
  eval.batch_size = cfg.trainer.eval_batch_size;
  eval.threshold = cfg.trainer.eval_threshold;
  const auto report = evaluate(loaded.model, samples, cfg.data, eval);
  write_text(args.out_dir / "report.jsonl", report.to_jsonl());
  print_metrics(out, args.split, report);
  return kSuccess;
}

int cmd_infer(const InferArgs& args, std::ostream& out, std::ostream& err) {
  LoadedModel loaded = load_model(args.checkpoint);
  write_snapshot(args.out_dir, loaded.config);
  int failures = 0;
  for (const auto& path : args.images) {
    try {
      const RawImage image = to_rgb(read_image(path));
      const auto prob = predict_probability(loaded.model, image, loaded.config.data);
      const auto mask = binarize(prob, args.threshold);
      const std::string stem = path.stem().string();
      write_png(args.out_dir / (stem + "_mask.png"), render_mask(mask));
      write_png(args.out_dir / (stem + "_overlay.png"), render_overlay(image, mask));
      write_png(args.out_dir / (stem + "_prob.png"), render_probability(prob));
      out << path.string() << ": foreground " << mask.to(torch::kFloat64).mean().item<double>() << '\n';
    } catch (const std::exception& e) {
      err << path.string() << ": " << e.what() << '\n';
      ++failures;
    }
  }
  if (failures > 0) {
    err << failures << " of " << args.images.size() << " images failed\n";
    return kRuntimeFailure;
  }
  return kSuccess;
}

int cmd_make_toy(const MakeToyArgs& args, std::ostream& out) {
  const RunConfig cfg = resolve_config(args.config);
  validate_config(cfg.model);
  write_snapshot(args.out_dir, cfg);
  const Dataset dataset = make_toy_splits(cfg.data, cfg.model.input_height, cfg.model.input_width);
  const auto manifest = export_dataset(dataset, args.out_dir);
  out << "wrote " << manifest.string() << ": train " << dataset.train.size() << ", val " << dataset.val.size()
      << ", test " << dataset.test.size() << '\n';
  return kSuccess;
}

}  // namespace auraseg::cli
