#pragma once

#include "auraseg/cli.hpp"
#include "auraseg/data.hpp"
#include "auraseg/model.hpp"
#include "auraseg/run_config.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace auraseg::cli {

inline constexpr const char* kResolvedConfigName = "resolved_config.cfg";

struct ConfigArgs {
  std::string config_path;
  std::vector<std::string> overrides;
};

struct TrainArgs {
  ConfigArgs config;
  std::filesystem::path out_dir = "runs/train";
};

struct EvaluateArgs {
  std::filesystem::path checkpoint;
  ConfigArgs config;  // optional; defaults to the config stored in the checkpoint
  std::string split = "test";
  std::filesystem::path out_dir = "runs/evaluate";
};

struct InferArgs {
  std::filesystem::path checkpoint;
  std::vector<std::filesystem::path> images;
  std::filesystem::path out_dir = "runs/infer";
  double threshold = 0.5;
};

struct ProfileArgs {
  ConfigArgs config;
  std::filesystem::path out_dir = "runs/profile";
  int warmup = 3;
  int iters = 10;
};

struct AblateArgs {
  ConfigArgs config;
  std::filesystem::path out_dir = "runs/ablate";
  bool train_toy = false;
  int seeds = 3;
  bool measure_fps = true;
  int fps_iters = 10;
};

struct ConvertArgs {
  std::string kind;
  std::filesystem::path root;
  std::filesystem::path out_manifest;
};

struct MakeToyArgs {
  ConfigArgs config;
  std::filesystem::path out_dir = "runs/toy";
};

int cmd_train(const TrainArgs& args, std::ostream& out);
int cmd_evaluate(const EvaluateArgs& args, std::ostream& out);
int cmd_infer(const InferArgs& args, std::ostream& out, std::ostream& err);
int cmd_profile(const ProfileArgs& args, std::ostream& out);
int cmd_ablate(const AblateArgs& args, std::ostream& out);
int cmd_convert_manifest(const ConvertArgs& args, std::ostream& out);
int cmd_make_toy(const MakeToyArgs& args, std::ostream& out);

/// Manifest records for a dataset's native layout; throws LayoutError listing
/// the missing directories when the layout is not recognized.
std::vector<SampleRecord> discover_layout(const std::string& kind, const std::filesystem::path& root);

// Shared plumbing.
RunConfig resolve_config(const ConfigArgs& args);
void write_snapshot(const std::filesystem::path& out_dir, const RunConfig& cfg);
Dataset load_configured_dataset(const RunConfig& cfg);

struct LoadedModel {
  RunConfig config;
  AuraSeg model{nullptr};
};
/// Rebuilds the network described by the checkpoint's stored config and loads its weights.
LoadedModel load_model(const std::filesystem::path& checkpoint);

}  // namespace auraseg::cli
