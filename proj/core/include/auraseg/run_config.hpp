#pragma once

#include "auraseg/data.hpp"
#include "auraseg/key_value.hpp"
#include "auraseg/losses.hpp"
#include "auraseg/model_config.hpp"
#include "auraseg/trainer.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace auraseg {

// Everything a command needs, loaded from one flat key-value file. Keys are
// prefixed by section: model.*, loss.*, trainer.*, data.* (see README for the
// full list). Unknown keys are rejected.
struct RunConfig {
  ModelConfig model;
  LossParams loss;
  TrainConfig trainer;
  DataConfig data;

  bool operator==(const RunConfig&) const = default;
};

RunConfig run_config_from(const KeyValueDocument& doc);
KeyValueDocument to_document(const RunConfig& cfg);

/// Loads `path` (if not empty) and applies `key=value` overrides in order.
RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});
RunConfig parse_run_config(const std::string& text);
std::string serialize(const RunConfig& cfg);

/// Every key understood by run_config_from.
std::vector<std::string> known_config_keys();

}  // namespace auraseg
