#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <optional>
#include <string>

namespace auraseg {

inline constexpr int64_t kCheckpointVersion = 1;

struct TrainState {
  int epoch = 0;
  double best_monitor = 0.0;
  int best_epoch = 0;
  int epochs_since_improvement = 0;
  double current_lr = 0.0;
  torch::Tensor rng_state;  // torch CPU generator state, may be undefined
};

// Checkpoints are single torch archives (zip container) with the keys
//   format   "auraseg-checkpoint"
//   version  kCheckpointVersion
//   config   resolved run config, key-value text
//   model    nested archive of parameters and buffers; nesting follows module
//            names, e.g. model/backbone/stage1_csp/fuse/conv/weight
//   state    optional nested archive: epoch, best_monitor, best_epoch,
//            epochs_since_improvement, current_lr, rng_state
//   optimizer optional nested archive written by the optimizer itself
void save_checkpoint(const std::filesystem::path& path, const torch::nn::Module& model, const std::string& config_text,
                     const TrainState* state = nullptr, const torch::optim::Optimizer* optimizer = nullptr);

struct CheckpointInfo {
  int64_t version = 0;
  std::string config_text;
  std::optional<TrainState> state;
};

/// Reads only the header and config; the model structure must come from the config.
CheckpointInfo read_checkpoint_info(const std::filesystem::path& path);

/// Loads weights into `model` (whose structure must match) and optionally the optimizer state.
CheckpointInfo load_checkpoint(const std::filesystem::path& path, torch::nn::Module& model,
                               torch::optim::Optimizer* optimizer = nullptr);

}  // namespace auraseg
