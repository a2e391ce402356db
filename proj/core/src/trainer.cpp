#include "auraseg/trainer.hpp"

#include "auraseg/errors.hpp"
#include "auraseg/losses.hpp"
#include "auraseg/run_config.hpp"

#include <ATen/CPUGeneratorImpl.h>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>

namespace auraseg {

namespace fs = std::filesystem;

void validate_train_config(const TrainConfig& cfg) {
  if (!(cfg.lr > 0.0) || !std::isfinite(cfg.lr)) throw ConfigError("trainer.lr must be > 0");
  if (cfg.weight_decay < 0.0) throw ConfigError("trainer.weight_decay must be >= 0");
  if (cfg.batch_size < 1) throw ConfigError("trainer.batch_size must be >= 1");
  if (cfg.max_epochs < 1) throw ConfigError("trainer.max_epochs must be >= 1");
  if (cfg.lr_reduce_patience < 1) throw ConfigError("trainer.lr_reduce_patience must be >= 1");
  if (cfg.patience <= cfg.lr_reduce_patience) {
    throw ConfigError("trainer.patience must exceed trainer.lr_reduce_patience");
  }
  if (!(cfg.lr_reduce_factor > 0.0 && cfg.lr_reduce_factor < 1.0)) {
    throw ConfigError("trainer.lr_reduce_factor must lie in (0, 1)");
  }
  if (cfg.monitor != "val_miou") throw ConfigError("trainer.monitor supports only val_miou");
  if (!(cfg.eval_threshold >= 0.0 && cfg.eval_threshold < 1.0)) {
    throw ConfigError("trainer.eval_threshold must lie in [0, 1)");
  }
  if (cfg.eval_batch_size < 1) throw ConfigError("trainer.eval_batch_size must be >= 1");
}

bool ImprovementTracker::update(double value) {
  ++seen_;
  if (seen_ == 1 || value > best_) {
    best_ = value;
    best_step_ = seen_;
    since_ = 0;
    return true;
  }
  ++since_;
  return false;
}

EarlyStopping::EarlyStopping(int patience) : patience_(patience) {
  if (patience < 1) throw ConfigError("early-stopping patience must be >= 1");
}

bool EarlyStopping::step(double monitor) {
  tracker_.update(monitor);
  return tracker_.steps_since_improvement() >= patience_;
}

PlateauScheduler::PlateauScheduler(double initial_lr, double factor, int patience)
    : lr_(initial_lr), factor_(factor), patience_(patience) {}

double PlateauScheduler::step(double monitor) {
  if (!has_best_ || monitor > best_) {
    has_best_ = true;
    best_ = monitor;
    bad_epochs_ = 0;
    return lr_;
  }
  if (++bad_epochs_ >= patience_) {
    lr_ *= factor_;
    ++reductions_;
    bad_epochs_ = 0;
  }
  return lr_;
}

std::string EpochRecord::to_json() const {
  nlohmann::json j = {{"epoch", epoch},
                      {"loss", loss},
                      {"dice", dice},
                      {"focal", focal},
                      {"aux", aux},
                      {"monitor", monitor},
                      {"val_miou", val.miou},
                      {"val_f1", val.f1},
                      {"val_precision", val.precision},
                      {"val_recall", val.recall},
                      {"lr", lr},
                      {"improved", improved},
                      {"seconds", seconds}};
  return j.dump();
}

MetricsReport evaluate(AuraSeg& model, const std::vector<Sample>& samples, const DataConfig& data,
                       const EvalOptions& options) {
  if (samples.empty()) throw DataError("cannot evaluate an empty split");
  const bool was_training = model->is_training();
  model->eval();
  torch::NoGradGuard no_grad;

  const auto dtype = model->parameters().front().scalar_type();
  BatchOptions batching;
  batching.batch_size = options.batch_size;
  batching.dtype = dtype;
  MetricsAccumulator acc(options.threshold, options.sweep);
  for (const auto& batch : make_batches(samples, data, batching)) {
    const auto probs = model(batch.images).final_prob;
    for (size_t i = 0; i < batch.ids.size(); ++i) {
      acc.add_image(batch.ids[i], probs[static_cast<int64_t>(i)], batch.masks[static_cast<int64_t>(i)]);
    }
  }
  model->train(was_training);
  return acc.report();
}

namespace {

// Deep copy of every parameter and buffer, for restoring the best epoch.
class StateSnapshot {
 public:
  void capture(const torch::nn::Module& module) {
    torch::NoGradGuard no_grad;
    tensors_.clear();
    for (const auto& item : module.named_parameters(true)) tensors_.emplace_back(item.key(), item.value().clone());
    for (const auto& item : module.named_buffers(true)) tensors_.emplace_back(item.key(), item.value().clone());
  }

  void restore(torch::nn::Module& module) const {
    torch::NoGradGuard no_grad;
    auto params = module.named_parameters(true);
    auto buffers = module.named_buffers(true);
    for (const auto& [name, value] : tensors_) {
      if (auto* p = params.find(name)) {
        p->copy_(value);
      } else if (auto* b = buffers.find(name)) {
        b->copy_(value);
      }
    }
  }

  bool empty() const noexcept { return tensors_.empty(); }

 private:
  std::vector<std::pair<std::string, torch::Tensor>> tensors_;
};

void set_lr(torch::optim::Optimizer& optimizer, double lr) {
  for (auto& group : optimizer.param_groups()) {
    static_cast<torch::optim::AdamWOptions&>(group.options()).lr(lr);
  }
}

}  // namespace

TrainResult train(const RunConfig& cfg, const Dataset& dataset, const TrainOptions& options) {
  const auto validated = validate_config(cfg.model);
  validate_loss_params(cfg.loss);
  validate_train_config(cfg.trainer);
  if (dataset.train.empty()) throw DataError("training split is empty");
  if (dataset.val.empty() && !options.monitor_override) throw DataError("validation split is empty");

  const auto& tc = cfg.trainer;
  const std::string config_text = serialize(cfg);
  TrainResult result;
  result.model = build_model(validated, tc.seed, tc.precision);
  AuraSeg& model = result.model;

  torch::optim::AdamW optimizer(model->parameters(),
                                torch::optim::AdamWOptions(tc.lr).weight_decay(tc.weight_decay));
  PlateauScheduler scheduler(tc.lr, tc.lr_reduce_factor, tc.lr_reduce_patience);
  EarlyStopping early_stopping(tc.patience);
  StateSnapshot best_state;

  std::ofstream history_log;
  if (!options.output_dir.empty()) {
    fs::create_directories(options.output_dir);
    history_log.open(options.output_dir / "history.log", std::ios::app);
    if (!history_log) throw IoError("cannot open " + (options.output_dir / "history.log").string());
    result.best_checkpoint = options.output_dir / "best.ckpt";
  }

  EvalOptions eval_options;
  eval_options.batch_size = tc.eval_batch_size;
  eval_options.threshold = tc.eval_threshold;

  result.stop_reason = "max_epochs";
  for (int epoch = 1; epoch <= tc.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    EpochRecord record;
    record.epoch = epoch;
    record.lr = scheduler.lr();

    model->train();
    BatchOptions batching;
    batching.batch_size = tc.batch_size;
    batching.shuffle = true;
    batching.seed = cfg.data.shuffle_seed ^ tc.seed;
    batching.epoch = epoch;
    batching.augment = true;
    batching.dtype = dtype_of(tc.precision);

    int64_t seen = 0;
    int batch_index = 0;
    BatchQueue queue(dataset.train, cfg.data, batching);
    while (auto next = queue.next()) {
      const Batch& batch = *next;
      optimizer.zero_grad();
      const auto out = model(batch.images);
      const auto losses = total_loss(out, batch.masks, cfg.loss);
      const double loss_value = losses.total.item<double>();
      if (!std::isfinite(loss_value)) {
        throw NumericsError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batch_index) + " (dice " + std::to_string(losses.dice) + ", focal " +
                            std::to_string(losses.focal) + ", aux " + std::to_string(losses.aux) + ")");
      }
      losses.total.backward();
      optimizer.step();

      const auto n = static_cast<int64_t>(batch.ids.size());
      record.loss += loss_value * n;
      record.dice += losses.dice * n;
      record.focal += losses.focal * n;
      record.aux += losses.aux * n;
      seen += n;
      ++batch_index;
    }
    record.loss /= seen;
    record.dice /= seen;
    record.focal /= seen;
    record.aux /= seen;

    if (options.monitor_override) {
      record.monitor = options.monitor_override(epoch);
    } else {
      const auto report = evaluate(model, dataset.val, cfg.data, eval_options);
      record.val = report.aggregate;
      record.monitor = report.aggregate.miou;
    }

    const bool stop = early_stopping.step(record.monitor);
    record.improved = early_stopping.tracker().best_step() == epoch;
    if (record.improved) {
      best_state.capture(*model);
      result.best_epoch = epoch;
      result.best_monitor = record.monitor;
    }
    set_lr(optimizer, scheduler.step(record.monitor));

    record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back(record);
    if (history_log.is_open()) history_log << record.to_json() << '\n' << std::flush;
    if (options.on_epoch) options.on_epoch(record);

    if (record.improved && !result.best_checkpoint.empty()) {
      TrainState state;
      state.epoch = epoch;
      state.best_monitor = result.best_monitor;
      state.best_epoch = result.best_epoch;
      state.epochs_since_improvement = 0;
      state.current_lr = scheduler.lr();
      state.rng_state = at::detail::getDefaultCPUGenerator().get_state();
      save_checkpoint(result.best_checkpoint, *model, config_text, &state, &optimizer);
    }

    result.stopped_epoch = epoch;
    if (stop) {
      result.stop_reason = "early_stop";
      break;
    }
  }

  if (!best_state.empty()) best_state.restore(*model);
  model->eval();
  return result;
}

}  // namespace auraseg
