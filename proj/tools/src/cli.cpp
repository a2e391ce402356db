#include "auraseg/cli.hpp"

#include "auraseg/errors.hpp"
#include "commands.hpp"

#include <CLI11.hpp>

#include <ostream>

namespace auraseg::cli {

namespace {

void add_config_options(CLI::App* cmd, ConfigArgs& args, bool required) {
  auto* opt = cmd->add_option("--config", args.config_path, "key = value run config");
  if (required) {
    opt->required()->check(CLI::ExistingFile);
  } else {
    opt->check(CLI::ExistingFile);
  }
  cmd->add_option("--set", args.overrides, "override a config key, key=value (repeatable)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Drivable-area segmentation: training, evaluation, inference and profiling", "auraseg"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "train a model and keep the best checkpoint");
  add_config_options(train_cmd, train.config, true);
  train_cmd->add_option("--out", train.out_dir, "output directory");

  EvaluateArgs evaluate;
  auto* eval_cmd = app.add_subcommand("evaluate", "evaluate a checkpoint on a dataset split");
  eval_cmd->add_option("--checkpoint", evaluate.checkpoint)->required()->check(CLI::ExistingFile);
  add_config_options(eval_cmd, evaluate.config, false);
  eval_cmd->add_option("--split", evaluate.split)->check(CLI::IsMember({"train", "val", "test"}));
  eval_cmd->add_option("--out", evaluate.out_dir, "output directory");

  InferArgs infer;
  auto* infer_cmd = app.add_subcommand("infer", "write mask, overlay and probability PNGs per image");
  infer_cmd->add_option("--checkpoint", infer.checkpoint)->required()->check(CLI::ExistingFile);
  infer_cmd->add_option("--out", infer.out_dir, "output directory");
  infer_cmd->add_option("--threshold", infer.threshold, "foreground iff probability > threshold")
      ->check(CLI::Range(0.0, 1.0));
  infer_cmd->add_option("images", infer.images, "input images")->required();

  ProfileArgs profile;
  auto* profile_cmd = app.add_subcommand("profile", "parameter, FLOP and FPS report for one model");
  add_config_options(profile_cmd, profile.config, false);
  profile_cmd->add_option("--out", profile.out_dir, "output directory");
  profile_cmd->add_option("--warmup", profile.warmup)->check(CLI::NonNegativeNumber);
  profile_cmd->add_option("--iters", profile.iters)->check(CLI::Range(10, 100000));

  AblateArgs ablate;
  auto* ablate_cmd = app.add_subcommand("ablate", "profile (and optionally train) the four ablation variants");
  add_config_options(ablate_cmd, ablate.config, false);
  ablate_cmd->add_option("--out", ablate.out_dir, "output directory");
  ablate_cmd->add_flag("--train-toy", ablate.train_toy, "train every variant on the toy dataset");
  ablate_cmd->add_option("--seeds", ablate.seeds, "training seeds per variant")->check(CLI::Range(1, 100));
  ablate_cmd->add_flag("!--no-fps", ablate.measure_fps, "skip FPS measurement");
  ablate_cmd->add_option("--fps-iters", ablate.fps_iters)->check(CLI::Range(10, 100000));

  ConvertArgs convert;
  auto* convert_cmd = app.add_subcommand("convert-manifest", "write a manifest for a dataset's native layout");
  convert_cmd->add_option("--kind", convert.kind)->required()->check(CLI::IsMember({"gmrp", "kitti_road", "folder_pairs"}));
  convert_cmd->add_option("--root", convert.root)->required()->check(CLI::ExistingDirectory);
  convert_cmd->add_option("--out", convert.out_manifest, "manifest file to write")->required();

  MakeToyArgs toy;
  auto* toy_cmd = app.add_subcommand("make-toy", "export the synthetic toy dataset as PNGs plus a manifest");
  add_config_options(toy_cmd, toy.config, false);
  toy_cmd->add_option("--out", toy.out_dir, "output directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train, out);
    if (*eval_cmd) return cmd_evaluate(evaluate, out);
    if (*infer_cmd) return cmd_infer(infer, out, err);
    if (*profile_cmd) return cmd_profile(profile, out);
    if (*ablate_cmd) return cmd_ablate(ablate, out);
    if (*convert_cmd) return cmd_convert_manifest(convert, out);
    if (*toy_cmd) return cmd_make_toy(toy, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  } catch (const std::exception& e) {
    err << "unexpected error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kUsage;
}

}  // namespace auraseg::cli
