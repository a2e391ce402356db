#pragma once

#include "auraseg/checkpoint.hpp"
#include "auraseg/data.hpp"
#include "auraseg/feature_map.hpp"
#include "auraseg/metrics.hpp"
#include "auraseg/model.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace auraseg {

struct RunConfig;

struct TrainConfig {
  double lr = 1e-3;
  double weight_decay = 1e-2;
  int batch_size = 4;
  int max_epochs = 200;
  int patience = 20;            // stagnant epochs before stopping
  double lr_reduce_factor = 0.5;
  int lr_reduce_patience = 5;   // stagnant epochs before each LR reduction
  uint64_t seed = 0;
  std::string monitor = "val_miou";
  Precision precision = Precision::Float32;
  double eval_threshold = 0.5;
  int eval_batch_size = 4;

  bool operator==(const TrainConfig&) const = default;
};

/// Throws ConfigError on lr <= 0, patience <= lr_reduce_patience, and similar.
void validate_train_config(const TrainConfig& cfg);

// Tracks the best value of a maximized monitor. Only a strict improvement
// resets the stagnation counter.
class ImprovementTracker {
 public:
  /// Returns true when `value` strictly improves on the best seen so far.
  bool update(double value);

  bool has_value() const noexcept { return seen_ > 0; }
  double best() const noexcept { return best_; }
  int best_step() const noexcept { return best_step_; }
  int steps_since_improvement() const noexcept { return since_; }

 private:
  double best_ = 0.0;
  int best_step_ = 0;
  int seen_ = 0;
  int since_ = 0;
};

/// Requests a stop once `patience` consecutive epochs fail to improve the monitor.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience);

  /// Feeds one epoch's monitor value; returns true when training should stop.
  bool step(double monitor);
  const ImprovementTracker& tracker() const noexcept { return tracker_; }
  int patience() const noexcept { return patience_; }

 private:
  int patience_;
  ImprovementTracker tracker_;
};

// Reduce-on-plateau for a maximized monitor: every `patience` consecutive
// stagnant epochs multiply the learning rate by `factor`, then start counting
// again.
class PlateauScheduler {
 public:
  PlateauScheduler(double initial_lr, double factor, int patience);

  /// Feeds one epoch's monitor value and returns the learning rate for the next epoch.
  double step(double monitor);
  double lr() const noexcept { return lr_; }
  int reductions() const noexcept { return reductions_; }

 private:
  double lr_;
  double factor_;
  int patience_;
  int bad_epochs_ = 0;
  int reductions_ = 0;
  bool has_best_ = false;
  double best_ = 0.0;
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double dice = 0.0;
  double focal = 0.0;
  double aux = 0.0;
  double monitor = 0.0;
  SegmentationMetrics val;
  double lr = 0.0;  // learning rate used during this epoch
  bool improved = false;
  double seconds = 0.0;

  std::string to_json() const;
};

struct EvalOptions {
  int batch_size = 4;
  double threshold = 0.5;
  std::vector<double> sweep = default_thresholds();
};

/// Eval-mode forward over `samples` (batched), threshold metrics plus the max-F sweep.
/// Throws DataError when `samples` is empty.
MetricsReport evaluate(AuraSeg& model, const std::vector<Sample>& samples, const DataConfig& data,
                       const EvalOptions& options = {});

using MonitorOverride = std::function<double(int epoch)>;

struct TrainOptions {
  std::filesystem::path output_dir;  // empty: keep everything in memory
  MonitorOverride monitor_override;  // replaces validation evaluation when set
  std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
  AuraSeg model{nullptr};  // weights restored to the best epoch
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_monitor = 0.0;
  int stopped_epoch = 0;
  std::string stop_reason;  // "early_stop" or "max_epochs"
  std::filesystem::path best_checkpoint;
};

/// AdamW with decoupled weight decay, plateau LR reduction and early stopping
/// on the validation monitor. Throws DataError for empty train / validation
/// splits and NumericsError when a loss turns non-finite.
TrainResult train(const RunConfig& cfg, const Dataset& dataset, const TrainOptions& options = {});

}  // namespace auraseg
