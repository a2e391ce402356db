#include "auraseg/checkpoint.hpp"

#include "auraseg/errors.hpp"

namespace auraseg {

namespace fs = std::filesystem;

namespace {

constexpr const char* kFormatTag = "auraseg-checkpoint";

CheckpointInfo read_header(torch::serialize::InputArchive& archive, const fs::path& path) {
  c10::IValue format;
  if (!archive.try_read("format", format) || !format.isString() || format.toStringRef() != kFormatTag) {
    throw IoError(path.string() + " is not an auraseg checkpoint");
  }
  CheckpointInfo info;
  c10::IValue version;
  archive.read("version", version);
  info.version = version.toInt();
  if (info.version > kCheckpointVersion) {
    throw IoError(path.string() + ": checkpoint version " + std::to_string(info.version) + " is newer than supported");
  }
  c10::IValue config;
  archive.read("config", config);
  info.config_text = config.toStringRef();

  torch::serialize::InputArchive state_archive;
  if (archive.try_read("state", state_archive)) {
    TrainState state;
    c10::IValue v;
    state_archive.read("epoch", v);
    state.epoch = static_cast<int>(v.toInt());
    state_archive.read("best_monitor", v);
    state.best_monitor = v.toDouble();
    state_archive.read("best_epoch", v);
    state.best_epoch = static_cast<int>(v.toInt());
    state_archive.read("epochs_since_improvement", v);
    state.epochs_since_improvement = static_cast<int>(v.toInt());
    state_archive.read("current_lr", v);
    state.current_lr = v.toDouble();
    torch::Tensor rng;
    if (state_archive.try_read("rng_state", rng)) state.rng_state = rng;
    info.state = state;
  }
  return info;
}

}  // namespace

void save_checkpoint(const fs::path& path, const torch::nn::Module& model, const std::string& config_text,
                     const TrainState* state, const torch::optim::Optimizer* optimizer) {
  torch::serialize::OutputArchive archive;
  archive.write("format", c10::IValue(std::string(kFormatTag)));
  archive.write("version", c10::IValue(kCheckpointVersion));
  archive.write("config", c10::IValue(config_text));

  torch::serialize::OutputArchive model_archive;
  model.save(model_archive);
  archive.write("model", model_archive);

  if (state) {
    torch::serialize::OutputArchive state_archive;
    state_archive.write("epoch", c10::IValue(static_cast<int64_t>(state->epoch)));
    state_archive.write("best_monitor", c10::IValue(state->best_monitor));
    state_archive.write("best_epoch", c10::IValue(static_cast<int64_t>(state->best_epoch)));
    state_archive.write("epochs_since_improvement", c10::IValue(static_cast<int64_t>(state->epochs_since_improvement)));
    state_archive.write("current_lr", c10::IValue(state->current_lr));
    if (state->rng_state.defined()) state_archive.write("rng_state", state->rng_state);
    archive.write("state", state_archive);
  }
  if (optimizer) {
    torch::serialize::OutputArchive optimizer_archive;
    optimizer->save(optimizer_archive);
    archive.write("optimizer", optimizer_archive);
  }

  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  try {
    archive.save_to(path.string());
  } catch (const c10::Error& e) {
    throw IoError("cannot write checkpoint " + path.string() + ": " + e.what_without_backtrace());
  }
}

CheckpointInfo read_checkpoint_info(const fs::path& path) {
  torch::serialize::InputArchive archive;
  try {
    archive.load_from(path.string());
  } catch (const c10::Error& e) {
    throw IoError("cannot read checkpoint " + path.string() + ": " + e.what_without_backtrace());
  }
  return read_header(archive, path);
}

CheckpointInfo load_checkpoint(const fs::path& path, torch::nn::Module& model, torch::optim::Optimizer* optimizer) {
  torch::serialize::InputArchive archive;
  try {
    archive.load_from(path.string());
  } catch (const c10::Error& e) {
    throw IoError("cannot read checkpoint " + path.string() + ": " + e.what_without_backtrace());
  }
  auto info = read_header(archive, path);
  try {
    torch::serialize::InputArchive model_archive;
    archive.read("model", model_archive);
    model.load(model_archive);
    if (optimizer) {
      torch::serialize::InputArchive optimizer_archive;
      if (archive.try_read("optimizer", optimizer_archive)) optimizer->load(optimizer_archive);
    }
  } catch (const c10::Error& e) {
    throw IoError("checkpoint " + path.string() + " does not match the model: " + e.what_without_backtrace());
  }
  return info;
}

}  // namespace auraseg
