#include "auraseg/run_config.hpp"

#include "auraseg/errors.hpp"

#include <functional>

namespace auraseg {

namespace {

// One entry per config key: how to read it from a document into a RunConfig
// and how to render the current value back to text.
struct Binding {
  std::string key;
  std::function<void(const KeyValueDocument&, RunConfig&)> read;
  std::function<std::string(const RunConfig&)> write;
};

template <typename Member>
Binding int_binding(std::string key, Member member) {
  return {key,
          [key, member](const KeyValueDocument& d, RunConfig& c) {
            if (auto v = d.get_int(key)) std::invoke(member, c) = *v;
          },
          [member](const RunConfig& c) { return std::to_string(std::invoke(member, c)); }};
}

template <typename Member>
Binding seed_binding(std::string key, Member member) {
  return {key,
          [key, member](const KeyValueDocument& d, RunConfig& c) {
            if (auto v = d.get_int(key)) {
              if (*v < 0) throw ConfigError("key '" + key + "' expects a non-negative integer");
              std::invoke(member, c) = static_cast<uint64_t>(*v);
            }
          },
          [member](const RunConfig& c) { return std::to_string(std::invoke(member, c)); }};
}

template <typename Member>
Binding real_binding(std::string key, Member member) {
  return {key,
          [key, member](const KeyValueDocument& d, RunConfig& c) {
            if (auto v = d.get_real(key)) std::invoke(member, c) = *v;
          },
          [member](const RunConfig& c) { return format_real(std::invoke(member, c)); }};
}

template <typename Member>
Binding bool_binding(std::string key, Member member) {
  return {key,
          [key, member](const KeyValueDocument& d, RunConfig& c) {
            if (auto v = d.get_bool(key)) std::invoke(member, c) = *v;
          },
          [member](const RunConfig& c) { return std::string(std::invoke(member, c) ? "true" : "false"); }};
}

template <typename Member>
Binding string_binding(std::string key, Member member) {
  return {key,
          [key, member](const KeyValueDocument& d, RunConfig& c) {
            if (auto v = d.get_string(key)) std::invoke(member, c) = *v;
          },
          [member](const RunConfig& c) { return std::invoke(member, c); }};
}

template <typename Member>
Binding int_list_binding(std::string key, Member member) {
  return {key,
          [key, member](const KeyValueDocument& d, RunConfig& c) {
            if (auto v = d.get_int_list(key)) std::invoke(member, c) = *v;
          },
          [member](const RunConfig& c) { return join_ints(std::invoke(member, c)); }};
}

template <typename Member>
Binding triple_binding(std::string key, Member member) {
  return {key,
          [key, member](const KeyValueDocument& d, RunConfig& c) {
            if (auto v = d.get_real_list(key)) {
              if (v->size() != 3) throw ConfigError("key '" + key + "' expects 3 comma-separated reals");
              auto& out = std::invoke(member, c);
              for (size_t i = 0; i < 3; ++i) out[i] = (*v)[i];
            }
          },
          [member](const RunConfig& c) {
            const auto& v = std::invoke(member, c);
            return join_reals({v[0], v[1], v[2]});
          }};
}

const std::vector<Binding>& bindings() {
  static const std::vector<Binding> table = [] {
    std::vector<Binding> b;
    auto model = [](auto field) { return [field](auto& c) -> auto& { return c.model.*field; }; };
    auto loss = [](auto field) { return [field](auto& c) -> auto& { return c.loss.*field; }; };
    auto trainer = [](auto field) { return [field](auto& c) -> auto& { return c.trainer.*field; }; };
    auto data = [](auto field) { return [field](auto& c) -> auto& { return c.data.*field; }; };

    b.push_back(int_binding("model.in_channels", model(&ModelConfig::in_channels)));
    b.push_back(int_binding("model.num_classes", model(&ModelConfig::num_classes)));
    b.push_back(int_list_binding("model.encoder_channels", model(&ModelConfig::encoder_channels)));
    b.push_back(int_list_binding("model.encoder_blocks", model(&ModelConfig::encoder_blocks)));
    b.push_back(bool_binding("model.use_aspp", model(&ModelConfig::use_aspp)));
    b.push_back(bool_binding("model.use_apud", model(&ModelConfig::use_apud)));
    b.push_back(bool_binding("model.use_rbrm", model(&ModelConfig::use_rbrm)));
    b.push_back(int_binding("model.aspp_filters", model(&ModelConfig::aspp_filters)));
    b.push_back(int_list_binding("model.aspp_dilations", model(&ModelConfig::aspp_dilations)));
    b.push_back(int_binding("model.aspp_out_channels", model(&ModelConfig::aspp_out_channels)));
    b.push_back(int_list_binding("model.decoder_channels", model(&ModelConfig::decoder_channels)));
    b.push_back(int_binding("model.se_reduction", model(&ModelConfig::se_reduction)));
    b.push_back(int_binding("model.spatial_kernel", model(&ModelConfig::spatial_kernel)));
    b.push_back(int_binding("model.rbrm_depth", model(&ModelConfig::rbrm_depth)));
    b.push_back(int_binding("model.rbrm_base_channels", model(&ModelConfig::rbrm_base_channels)));
    b.push_back({"model.input_size",
                 [](const KeyValueDocument& d, RunConfig& c) {
                   if (auto v = d.get_int_list("model.input_size")) {
                     if (v->size() != 2) throw ConfigError("key 'model.input_size' expects 'height,width'");
                     c.model.input_height = (*v)[0];
                     c.model.input_width = (*v)[1];
                   }
                 },
                 [](const RunConfig& c) { return join_ints({c.model.input_height, c.model.input_width}); }});

    b.push_back(real_binding("loss.alpha", loss(&LossParams::alpha)));
    b.push_back(real_binding("loss.gamma", loss(&LossParams::gamma)));
    b.push_back(real_binding("loss.lambda1", loss(&LossParams::lambda1)));
    b.push_back(real_binding("loss.lambda2", loss(&LossParams::lambda2)));
    b.push_back(real_binding("loss.aux_weight", loss(&LossParams::aux_weight)));
    b.push_back(real_binding("loss.epsilon", loss(&LossParams::epsilon)));

    b.push_back(real_binding("trainer.lr", trainer(&TrainConfig::lr)));
    b.push_back(real_binding("trainer.weight_decay", trainer(&TrainConfig::weight_decay)));
    b.push_back(int_binding("trainer.batch_size", trainer(&TrainConfig::batch_size)));
    b.push_back(int_binding("trainer.max_epochs", trainer(&TrainConfig::max_epochs)));
    b.push_back(int_binding("trainer.patience", trainer(&TrainConfig::patience)));
    b.push_back(real_binding("trainer.lr_reduce_factor", trainer(&TrainConfig::lr_reduce_factor)));
    b.push_back(int_binding("trainer.lr_reduce_patience", trainer(&TrainConfig::lr_reduce_patience)));
    b.push_back(seed_binding("trainer.seed", trainer(&TrainConfig::seed)));
    b.push_back(string_binding("trainer.monitor", trainer(&TrainConfig::monitor)));
    b.push_back({"trainer.precision",
                 [](const KeyValueDocument& d, RunConfig& c) {
                   if (auto v = d.get_string("trainer.precision")) c.trainer.precision = parse_precision(*v);
                 },
                 [](const RunConfig& c) { return std::string(to_string(c.trainer.precision)); }});
    b.push_back(real_binding("trainer.eval_threshold", trainer(&TrainConfig::eval_threshold)));
    b.push_back(int_binding("trainer.eval_batch_size", trainer(&TrainConfig::eval_batch_size)));

    b.push_back(string_binding("data.source", data(&DataConfig::source)));
    b.push_back(string_binding("data.root", data(&DataConfig::root)));
    b.push_back(string_binding("data.manifest", data(&DataConfig::manifest)));
    b.push_back(triple_binding("data.mean", data(&DataConfig::mean)));
    b.push_back(triple_binding("data.std", data(&DataConfig::std)));
    b.push_back(bool_binding("data.hflip", data(&DataConfig::hflip)));
    b.push_back(real_binding("data.brightness_jitter", data(&DataConfig::brightness_jitter)));
    b.push_back(seed_binding("data.shuffle_seed", data(&DataConfig::shuffle_seed)));
    b.push_back(int_binding("data.toy_train", data(&DataConfig::toy_train)));
    b.push_back(int_binding("data.toy_val", data(&DataConfig::toy_val)));
    b.push_back(int_binding("data.toy_test", data(&DataConfig::toy_test)));
    b.push_back(seed_binding("data.toy_seed", data(&DataConfig::toy_seed)));
    return b;
  }();
  return table;
}

}  // namespace

RunConfig run_config_from(const KeyValueDocument& doc) {
  for (const auto& [key, value] : doc.entries()) {
    bool known = false;
    for (const auto& binding : bindings()) known = known || binding.key == key;
    if (!known) throw ConfigError("unknown config key '" + key + "'");
  }
  RunConfig cfg;
  for (const auto& binding : bindings()) binding.read(doc, cfg);
  if (cfg.data.source != "toy" && cfg.data.source != "manifest") {
    throw ConfigError("key 'data.source' expects toy or manifest, got '" + cfg.data.source + "'");
  }
  return cfg;
}

KeyValueDocument to_document(const RunConfig& cfg) {
  KeyValueDocument doc;
  for (const auto& binding : bindings()) doc.set(binding.key, binding.write(cfg));
  return doc;
}

RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  KeyValueDocument doc = path.empty() ? KeyValueDocument{} : KeyValueDocument::load(path);
  for (const auto& assignment : overrides) doc.apply_override(assignment);
  return run_config_from(doc);
}

RunConfig parse_run_config(const std::string& text) { return run_config_from(KeyValueDocument::parse(text)); }

std::string serialize(const RunConfig& cfg) { return to_document(cfg).to_string(); }

std::vector<std::string> known_config_keys() {
  std::vector<std::string> keys;
  for (const auto& binding : bindings()) keys.push_back(binding.key);
  return keys;
}

}  // namespace auraseg
